#pragma once

// Curvature datum f0 <= 0 on the torus, its mean, the admissible parameter
// interval (0, -mean f0), the nondegenerate maxima and the radius constant L.

#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "curvtorus/spectral.hpp"

namespace curvtorus {

// f0 = a (cos 2 pi x + cos 2 pi y - 2)
struct CosineFamily {
  double a = 0.5;
};

// f0 = -a * prod_i q_i with q_i = (2 - cos 2 pi (x - x_i) - cos 2 pi (y - y_i)) / 2,
// so f0 vanishes exactly at the centers.
struct MultiBumpFamily {
  std::vector<Point> centers;
  double a = 0.5;
};

struct TabulatedFamily {
  Field values;
  std::string source;  // file name or a label, informational only
};

using F0Family = std::variant<CosineFamily, MultiBumpFamily, TabulatedFamily>;

std::string describe(const F0Family& family);

enum class ValidationMode {
  strict,            // max f0 == 0, nondegenerate maxima, L verified
  allow_degenerate,  // degenerate maxima accepted (upper-end studies only)
  unchecked,         // arbitrary sign-changing datum, e.g. manufactured solutions
};

struct ProblemOptions {
  ValidationMode mode = ValidationMode::strict;
  double hess_tol = 1e-6;
  double f0_tol = 1e-10;
};

struct Maximum {
  Point p;
  double value;
  Eigen::Matrix2d hessian;  // full Hessian of f0 at p
};

class Problem {
 public:
  const F0Family& family() const noexcept { return *family_; }
  const Grid& grid() const noexcept { return f0_.grid(); }
  const Field& f0() const noexcept { return f0_; }
  double f0_bar() const noexcept { return f0_bar_; }
  double lambda_max() const noexcept { return -f0_bar_; }
  double f0_min() const noexcept { return f0_min_; }
  double f0_sup_norm() const noexcept { return f0_.sup_norm(); }
  const std::vector<Maximum>& maxima() const noexcept { return maxima_; }
  // NaN when no constant could be established (unchecked data without maxima).
  double L() const noexcept { return L_; }
  ValidationMode mode() const noexcept { return mode_; }

  // Pointwise evaluation; closed form for built-in families, trigonometric
  // interpolation for tabulated data.
  double f0_at(const Point& p) const;
  Eigen::Vector2d f0_gradient_at(const Point& p) const;
  Eigen::Matrix2d f0_hessian_at(const Point& p) const;

  // Same datum on another grid (closed forms resampled exactly).
  Problem on_grid(const Grid& grid) const;

 private:
  friend Problem build_problem(const F0Family&, const Grid&, const ProblemOptions&);

  Problem(std::shared_ptr<const F0Family> family, Field f0) : family_(std::move(family)), f0_(std::move(f0)) {}

  std::shared_ptr<const F0Family> family_;
  Field f0_;
  std::shared_ptr<const Interpolant> interp_;
  // tabulated data: interpolants of f_x, f_y, f_xx, f_xy, f_yy
  std::shared_ptr<const std::vector<Interpolant>> derivs_;
  double f0_bar_ = 0;
  double f0_min_ = 0;
  std::vector<Maximum> maxima_;
  double L_ = 0;
  ValidationMode mode_ = ValidationMode::strict;
  ProblemOptions options_;
};

Problem build_problem(const F0Family& family, const Grid& grid, const ProblemOptions& opts = {});

Field f_lambda(const Problem& p, double lambda);

// L with L^2 >= 4c and L^2 > -min f0, then f0 > -lambda/2 is checked on the
// disc of radius sqrt(lambda)/L around each maximum for sampled lambda.
struct LConstant {
  double L;
  double c1;  // quadratic lower bound from the Hessian
  double c2;  // sampled cubic remainder bound (one-sided, safety factor 1.5)
};
LConstant compute_L(const Problem& p);

// int f_lambda e^{2u}
double constraint_value(const Problem& p, double lambda, const Field& u);
ExpIntegral constraint_value_checked(const Problem& p, double lambda, const Field& u);

// True when f_lambda changes sign and has negative mean, the solvability
// condition for the curvature equation on the torus.
bool admissible_lambda(const Problem& p, double lambda);

}  // namespace curvtorus

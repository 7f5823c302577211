#pragma once

// Periodic N x N grid arithmetic on the unit flat torus [0,1)^2.
//
// Fields are sampled at x_i = i/n, y_j = j/n and stored as an n x n Eigen
// array with values(i, j) = f(x_i, y_j). Spectral coefficients follow the
// normalization c_k = n^{-2} sum_x f(x) exp(-2 pi i k.x), so c_(0,0) is the
// field mean and f(x) = sum_k c_k exp(2 pi i k.x). The trapezoidal rule is
// used for every integral; it is exact for trigonometric polynomials of
// degree < n and gives integrate(1) == 1 exactly.

#include <array>
#include <complex>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "curvtorus/errors.hpp"

namespace curvtorus {

using Point = Eigen::Vector2d;

// Exponent arguments of exp(2u) are clamped here; hitting the clamp is reported
// rather than raised.
inline constexpr double kExpCap = 300.0;

class Grid {
 public:
  explicit Grid(int n);

  int n() const noexcept { return n_; }
  double spacing() const noexcept { return 1.0 / n_; }
  double coordinate(int i) const noexcept { return static_cast<double>(i) / n_; }
  Point point(int i, int j) const noexcept { return {coordinate(i), coordinate(j)}; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(n_) * n_; }

  bool operator==(const Grid&) const = default;

 private:
  int n_;
};

// Shortest periodic displacement from `from` to `to`, each component in [-1/2, 1/2).
Point periodic_delta(const Point& from, const Point& to);
double periodic_distance(const Point& a, const Point& b);
// Wraps a point into the fundamental domain [0,1)^2.
Point wrap_point(const Point& p);

template <typename Scalar>
class BasicField {
 public:
  using Array = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  explicit BasicField(const Grid& grid) : grid_(grid), values_(Array::Zero(grid.n(), grid.n())) {}

  BasicField(const Grid& grid, Array values) : grid_(grid), values_(std::move(values)) {
    if (values_.rows() != grid_.n() || values_.cols() != grid_.n()) {
      throw Error(ErrorCode::GridMismatch, "field values do not match grid size");
    }
  }

  static BasicField constant(const Grid& grid, Scalar value) {
    return BasicField(grid, Array::Constant(grid.n(), grid.n(), value));
  }

  // Samples fn(x, y) at every grid node.
  template <typename Fn>
  static BasicField from_function(const Grid& grid, Fn&& fn) {
    Array values(grid.n(), grid.n());
    for (int j = 0; j < grid.n(); ++j) {
      for (int i = 0; i < grid.n(); ++i) {
        values(i, j) = static_cast<Scalar>(fn(grid.coordinate(i), grid.coordinate(j)));
      }
    }
    return BasicField(grid, std::move(values));
  }

  const Grid& grid() const noexcept { return grid_; }
  const Array& values() const noexcept { return values_; }
  Array& values() noexcept { return values_; }

  Scalar operator()(int i, int j) const { return values_(i, j); }
  Scalar& operator()(int i, int j) { return values_(i, j); }

  bool all_finite() const { return values_.allFinite(); }
  Scalar max() const { return values_.maxCoeff(); }
  Scalar min() const { return values_.minCoeff(); }
  Scalar sup_norm() const { return values_.abs().maxCoeff(); }

 private:
  Grid grid_;
  Array values_;
};

using Field = BasicField<double>;

template <typename Scalar>
class BasicSpectralCoeffs {
 public:
  using Complex = std::complex<Scalar>;
  using Matrix = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic>;

  BasicSpectralCoeffs(const Grid& grid, Matrix data) : grid_(grid), data_(std::move(data)) {
    if (data_.rows() != grid_.n() || data_.cols() != grid_.n()) {
      throw Error(ErrorCode::GridMismatch, "coefficient matrix does not match grid size");
    }
  }

  const Grid& grid() const noexcept { return grid_; }
  const Matrix& data() const noexcept { return data_; }
  Matrix& data() noexcept { return data_; }

  // Coefficient of exp(2 pi i (k1 x + k2 y)); |k| <= n/2, with +-n/2 aliased.
  Complex at(int k1, int k2) const { return data_(storage_index(k1), storage_index(k2)); }

  // Signed frequency of storage index `index`, in [-n/2, n/2).
  static int frequency(int index, int n) { return index < n / 2 ? index : index - n; }
  int storage_index(int k) const;

 private:
  Grid grid_;
  Matrix data_;
};

using SpectralCoeffs = BasicSpectralCoeffs<double>;

template <typename Scalar>
struct BasicExpIntegral {
  Scalar value;
  bool capped;  // some exponent argument was clamped at kExpCap
};

using ExpIntegral = BasicExpIntegral<double>;

struct PoissonOptions {
  double mean_tol = 1e-10;
  bool strict = true;
};

enum class Dealias { none, three_halves };

template <typename Scalar>
BasicSpectralCoeffs<Scalar> transform(const BasicField<Scalar>& f);
template <typename Scalar>
BasicField<Scalar> inverse(const BasicSpectralCoeffs<Scalar>& c);

template <typename Scalar>
BasicField<Scalar> laplacian(const BasicField<Scalar>& f);

// Returns the mean-zero v with -lap v = rhs - mean(rhs).
template <typename Scalar>
BasicField<Scalar> solve_poisson(const BasicField<Scalar>& rhs, const PoissonOptions& opts = {});

// (d/dx f, d/dy f); the Nyquist mode is dropped from first derivatives.
template <typename Scalar>
std::array<BasicField<Scalar>, 2> gradient(const BasicField<Scalar>& f);

template <typename Scalar>
Scalar dirichlet_energy(const BasicField<Scalar>& f);
template <typename Scalar>
Scalar inner_grad(const BasicField<Scalar>& f, const BasicField<Scalar>& g);
template <typename Scalar>
Scalar mean(const BasicField<Scalar>& f);
template <typename Scalar>
Scalar integrate(const BasicField<Scalar>& f);
template <typename Scalar>
Scalar inner(const BasicField<Scalar>& f, const BasicField<Scalar>& g);
// sqrt(int f^2 + int |grad f|^2)
template <typename Scalar>
Scalar h1_norm(const BasicField<Scalar>& f);

// int weight * exp(2 f)
template <typename Scalar>
Scalar integrate_exp(const BasicField<Scalar>& f, const BasicField<Scalar>& weight);
template <typename Scalar>
BasicExpIntegral<Scalar> integrate_exp_checked(const BasicField<Scalar>& f,
                                               const BasicField<Scalar>& weight);

// Pointwise exp(2 f) with the exponent clamp; with Dealias::three_halves the
// product is formed on a 3n/2 grid and truncated back.
template <typename Scalar>
BasicField<Scalar> exp2(const BasicField<Scalar>& f, Dealias mode = Dealias::none,
                        bool* capped = nullptr);

// Spectral zero-padding / truncation onto another grid.
template <typename Scalar>
BasicField<Scalar> resample(const BasicField<Scalar>& f, const Grid& target);

// Trigonometric interpolant of a field; evaluation is O(n^2) per point.
template <typename Scalar>
class BasicInterpolant {
 public:
  explicit BasicInterpolant(const BasicField<Scalar>& f);
  Scalar operator()(const Point& p) const;
  const Grid& grid() const noexcept { return grid_; }

 private:
  Grid grid_;
  typename BasicSpectralCoeffs<Scalar>::Matrix coeffs_;
};

using Interpolant = BasicInterpolant<double>;

// Values of u at center + r * x for each offset x. Requires r * max|x| < 1/4 so
// the chart stays inside one fundamental domain.
template <typename Scalar>
std::vector<Scalar> sample_rescaled(const BasicField<Scalar>& u, const Point& center, double r,
                                    std::span<const Point> offsets);

}  // namespace curvtorus

#pragma once

// Explicit small-lambda machinery: the radial log-cutoff comparison function,
// the scale alpha putting alpha*phi on the constraint, the map
// I(u) = -int f0 e^{2u} / int e^{2u}, the step eps* and the curve
// h(eps) = I(u* - eps phi).

#include <vector>

#include "curvtorus/problem.hpp"

namespace curvtorus {

struct PhiOptions {
  // When the inner plateau is narrower than two grid cells the energy is
  // recomputed on a finer local periodic chart instead of failing.
  bool auto_refine = true;
  int max_chart_n = 2048;
};

struct ComparisonFn {
  double lambda;
  Point center;
  double L;
  double inner_radius;  // lambda^{3/2} / L
  double outer_radius;  // sqrt(lambda) / L
  Field field;          // sampled on the problem grid
  double energy;        // best available value: chart energy when refined
  double energy_grid;
  double energy_analytic;  // 2 pi log(1/lambda)
  bool refined;
  int chart_n;          // 0 when not refined
  double chart_side;    // physical side of the refinement chart
  double support_min_f;  // min of f_lambda over grid points where phi > 0
};

// log(1/lambda) for r <= inner, log(outer / r) up to outer, zero beyond.
double phi_profile(double lambda, double L, double r);

ComparisonFn build_phi(const Problem& p, double lambda, const PhiOptions& opts = {});

struct AlphaResult {
  double alpha;
  double constraint_residual;  // |z(alpha)| on the quadrature used
  bool chart_quadrature;
};
// Root of z(alpha) = int f_lambda e^{2 alpha phi}.
AlphaResult solve_alpha(const Problem& p, double lambda, const ComparisonFn& phi);

double I_map(const Problem& p, const Field& u);

struct EpsilonStar {
  double value;
  bool in_window;  // 0 < eps* < 6; a violation is reported, not raised
};
EpsilonStar epsilon_star(const Field& u_star, const ComparisonFn& phi);

struct HSample {
  double eps;
  double h;
  double h_prime;     // analytic derivative
  double h_prime_fd;  // centered difference, step 1e-4
};

struct MonotonicityProbe {
  double lambda_star;
  double eps_star;
  std::vector<HSample> h_samples;
  double ell;  // h(eps*)
  double min_h_prime;
  double max_fd_rel_error;
  double max_identity_error;  // E(u*-eps phi) vs E(u*) - eps (eps* - eps) E(phi), relative
};

MonotonicityProbe probe_h(const Problem& p, double lambda_star, const Field& u_star, const ComparisonFn& phi,
                          double eps_star, int k = 10);

// Largest lambda below which log(2 L^2 |f0|_inf / pi) / (2 log(1/lambda)) < sigma.
double closed_form_lambda_sigma(const Problem& p, double sigma = 1.0);

struct AlphaSample {
  double lambda;
  double alpha;
};
// Largest sampled lambda such that alpha <= sigma + 2 at it and at every
// smaller sampled lambda; 0 when the smallest sample already fails.
double empirical_lambda_sigma(std::vector<AlphaSample> samples, double sigma = 1.0);

}  // namespace curvtorus

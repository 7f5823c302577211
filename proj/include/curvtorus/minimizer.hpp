#pragma once

// Dirichlet-energy minimization over
//   C_lambda = { w : mean w = 0, int f_lambda e^{2w} = 0 }
// by projected gradient descent with a retraction along f_lambda, followed by
// multiplier extraction and assembly of the solution u = w + log(mu)/2 of
// -lap u = f_lambda e^{2u}.

#include <optional>
#include <string>
#include <vector>

#include "curvtorus/problem.hpp"

namespace curvtorus {

enum class Preconditioner {
  sobolev,  // (-lap)^{-1} on the mean-zero part
  l2,       // plain L2 gradient, for cross-checks on coarse grids
};

struct SolverConfig {
  int max_iters = 2000;
  double step0 = 0.5;
  double step_max = 0.5;
  double armijo = 1e-4;
  double grad_tol = 1e-8;
  double c_tol = 1e-10;
  double res_tol = 1e-5;  // relative pde residual accepted at convergence
  double t_max = 100.0;   // retraction search half-width
  Preconditioner preconditioner = Preconditioner::sobolev;
  bool enforce_zero_mean = true;
  Dealias dealias = Dealias::none;
  bool keep_log = false;
  std::optional<Field> warm_start;

  void validate() const;
};

struct IterationEntry {
  int iter;
  double energy;
  double grad_norm;
  double step;
};

enum class Termination { converged, max_iters, stalled };
std::string_view to_string(Termination t);

struct MinimizeResult {
  Field w;
  double mu;    // multiplier from the energy-weighted formula (reported)
  double mu_b;  // multiplier from testing the equation with f_lambda
  double multiplier_gap;
  double descent_multiplier;  // tangent-projection coefficient, equals mu at stationarity
  double beta;
  Field u;
  double pde_residual;      // sup |lap u + f_lambda e^{2u}|
  double pde_residual_rel;  // divided by sup |f_lambda e^{2u}|
  double constraint_residual;  // |int f_lambda e^{2w}|
  double mean_residual;
  double grad_norm;
  int iters;
  bool converged;
  Termination termination;
  bool exp_capped;
  std::vector<IterationEntry> log;
};

// u + t f_lambda with int f_lambda e^{2(u + t f_lambda)} = 0, then mean-subtracted
// (unless keep_mean). Throws RootNotBracketed if no root in |t| <= t_max.
Field project_constraint(const Problem& p, double lambda, const Field& u, double t_max = 100.0,
                         bool keep_mean = false);

struct Multipliers {
  double mu_a;
  double mu_b;
  double gap;  // |mu_a - mu_b| / |mu_a|
};
Multipliers extract_multiplier(const Problem& p, double lambda, const Field& w);

double pde_residual(const Problem& p, double lambda, const Field& u);
double relative_pde_residual(const Problem& p, double lambda, const Field& u);

MinimizeResult minimize(const Problem& p, double lambda, const SolverConfig& cfg = {});

}  // namespace curvtorus

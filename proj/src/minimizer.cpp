#include "curvtorus/minimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace curvtorus {

namespace {

// Sign and Newton ratio of g(t) = int f e^{2(u + t f)}, evaluated with the
// largest exponent factored out so neither overflows.
struct ScaledRoot {
  double g;      // scaled value, same sign as g(t)
  double dg;     // scaled derivative
  double abs_g;  // scaled int |f| e^{...}, for relative tests
};

ScaledRoot scaled_constraint(const Field& u, const Field& f, double t) {
  const auto& uv = u.values();
  const auto& fv = f.values();
  double top = -std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < uv.size(); ++k) top = std::max(top, 2.0 * (uv(k) + t * fv(k)));
  ScaledRoot r{0, 0, 0};
  for (Eigen::Index k = 0; k < uv.size(); ++k) {
    const double e = std::exp(2.0 * (uv(k) + t * fv(k)) - top);
    r.g += fv(k) * e;
    r.dg += 2.0 * fv(k) * fv(k) * e;
    r.abs_g += std::abs(fv(k)) * e;
  }
  return r;
}

double find_retraction_root(const Field& u, const Field& f, double t_max) {
  ScaledRoot r0 = scaled_constraint(u, f, 0.0);
  if (r0.g == 0.0 || std::abs(r0.g) <= 1e-15 * r0.abs_g) return 0.0;
  if (!(r0.dg > 0)) throw Error(ErrorCode::RootNotBracketed, "retraction direction vanishes");

  // g is increasing: walk outward until the sign flips.
  double lo = 0, hi = 0;
  const double dir = r0.g < 0 ? 1.0 : -1.0;
  double step = std::min(1.0, t_max);
  double prev = 0;
  bool bracketed = false;
  while (std::abs(prev) < t_max) {
    const double t = dir * std::min(std::abs(prev) + step, t_max);
    const ScaledRoot r = scaled_constraint(u, f, t);
    if ((dir > 0 && r.g >= 0) || (dir < 0 && r.g <= 0)) {
      lo = std::min(prev, t);
      hi = std::max(prev, t);
      bracketed = true;
      break;
    }
    prev = t;
    step *= 2;
  }
  if (!bracketed) {
    std::ostringstream os;
    os << "int f_lambda e^{2(u + t f_lambda)} keeps one sign for |t| <= " << t_max;
    throw Error(ErrorCode::RootNotBracketed, os.str());
  }

  // Safeguarded Newton inside [lo, hi].
  double t = dir > 0 ? lo : hi;
  for (int it = 0; it < 200; ++it) {
    const ScaledRoot r = scaled_constraint(u, f, t);
    if (r.g == 0.0) return t;
    if (r.g < 0) {
      lo = t;
    } else {
      hi = t;
    }
    double next = t - r.g / r.dg;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    const double change = std::abs(next - t);
    t = next;
    if (change <= 4 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t)) ||
        hi - lo <= 4 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t))) {
      break;
    }
  }
  return t;
}

// Metric used by the descent: H1-seminorm pairing for the Sobolev gradient,
// plain L2 otherwise.
double metric(Preconditioner pc, const Field& a, const Field& b) {
  return pc == Preconditioner::sobolev ? inner_grad(a, b) : inner(a, b);
}

double relative_constraint(const Field& f, const Field& w) {
  const double g = integrate_exp(w, f);
  Field absf = f;
  absf.values() = absf.values().abs();
  return std::abs(g) / std::max(1.0, integrate_exp(w, absf));
}

}  // namespace

std::string_view to_string(Termination t) {
  switch (t) {
    case Termination::converged: return "converged";
    case Termination::max_iters: return "max_iters";
    case Termination::stalled: return "stalled";
  }
  return "unknown";
}

void SolverConfig::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0) || !std::isfinite(v)) throw Error(ErrorCode::ConfigError, std::string(name) + " must be > 0");
  };
  if (max_iters <= 0) throw Error(ErrorCode::ConfigError, "max_iters must be > 0");
  positive(step0, "step0");
  positive(step_max, "step_max");
  positive(armijo, "armijo");
  positive(grad_tol, "grad_tol");
  positive(c_tol, "c_tol");
  positive(res_tol, "res_tol");
  positive(t_max, "t_max");
  if (warm_start && !warm_start->all_finite()) throw Error(ErrorCode::NonFinite, "warm start is not finite");
}

Field project_constraint(const Problem& p, double lambda, const Field& u, double t_max, bool keep_mean) {
  if (!u.all_finite()) throw Error(ErrorCode::NonFinite, "projection input is not finite");
  const Field f = f_lambda(p, lambda);
  if (!(u.grid() == f.grid())) throw Error(ErrorCode::GridMismatch, "field and problem grids differ");
  const double t = find_retraction_root(u, f, t_max);
  Field v = u;
  if (t != 0.0) v.values() += t * f.values();
  if (!keep_mean) v.values() -= mean(v);
  return v;
}

Multipliers extract_multiplier(const Problem& p, double lambda, const Field& w) {
  if (dirichlet_energy(w) < 1e-14) {
    throw Error(ErrorCode::InvalidArgument, "constant fields do not belong to the constraint set");
  }
  const Field f = f_lambda(p, lambda);
  const double fbar = mean(f);
  if (std::abs(fbar) < 1e-14) throw Error(ErrorCode::DivisionDegenerate, "int f_lambda vanishes");
  const auto g = gradient(w);
  const Field::Array weight = (-2.0 * w.values()).exp();
  const double grad_weighted = ((g[0].values().square() + g[1].values().square()) * weight).mean();
  const double mu_a = -2.0 * grad_weighted / fbar;

  Field f2 = f;
  f2.values() = f.values().square();
  const double denom = integrate_exp(w, f2);
  if (denom < 1e-14) throw Error(ErrorCode::DivisionDegenerate, "int f_lambda^2 e^{2w} below 1e-14");
  const double mu_b = inner_grad(w, f) / denom;
  return {mu_a, mu_b, std::abs(mu_a - mu_b) / std::abs(mu_a)};
}

double pde_residual(const Problem& p, double lambda, const Field& u) {
  const Field f = f_lambda(p, lambda);
  const Field lap = laplacian(u);
  return (lap.values() + f.values() * exp2(u).values()).abs().maxCoeff();
}

double relative_pde_residual(const Problem& p, double lambda, const Field& u) {
  const Field f = f_lambda(p, lambda);
  const double scale = (f.values() * exp2(u).values()).abs().maxCoeff();
  return pde_residual(p, lambda, u) / std::max(scale, 1e-300);
}

MinimizeResult minimize(const Problem& p, double lambda, const SolverConfig& cfg) {
  cfg.validate();
  if (!admissible_lambda(p, lambda)) {
    std::ostringstream os;
    os << "lambda = " << lambda << " is outside the solvable range: f_lambda must change sign and have negative mean";
    throw Error(ErrorCode::InvalidArgument, os.str());
  }
  const Grid& grid = p.grid();
  const Field f = f_lambda(p, lambda);
  const bool keep_mean = !cfg.enforce_zero_mean;
  const Preconditioner pc = cfg.preconditioner;

  Field start{grid};
  if (cfg.warm_start) start = cfg.warm_start->grid() == grid ? *cfg.warm_start : resample(*cfg.warm_start, grid);
  Field w = project_constraint(p, lambda, start, cfg.t_max, keep_mean);
  double energy = dirichlet_energy(w);

  MinimizeResult res{w, 0, 0, 0, 0, 0, w, 0, 0, 0, 0, 0, 0, false, Termination::max_iters, false, {}};
  double tau = cfg.step0;
  double gn = std::numeric_limits<double>::infinity();
  double c = 0;
  bool capped = false;
  int it = 0;
  for (;; ++it) {
    // Gradients of the energy and of the curvature constraint, as Riesz
    // representers in the chosen metric, both orthogonal to constants.
    bool hit = false;
    Field fe = exp2(w, cfg.dealias, &hit);
    capped = capped || hit;
    fe.values() *= f.values();
    fe.values() -= mean(fe);
    fe.values() *= 2.0;
    Field dE{grid}, dG{grid};
    if (pc == Preconditioner::sobolev) {
      dE = w;
      dE.values() = 2.0 * (w.values() - mean(w));
      dG = solve_poisson(fe, PoissonOptions{1e-10, false});
    } else {
      dE = laplacian(w);
      dE.values() *= -2.0;
      dG = fe;
    }
    const double gg = metric(pc, dG, dG);
    if (!(gg > 0)) throw Error(ErrorCode::DivisionDegenerate, "constraint gradient vanishes");
    c = metric(pc, dE, dG) / gg;
    Field d = dE;
    d.values() -= c * dG.values();
    gn = std::sqrt(std::max(0.0, metric(pc, d, d)));
    if (cfg.keep_log) res.log.push_back({it, energy, gn, tau});

    if (gn <= cfg.grad_tol && relative_constraint(f, w) <= cfg.c_tol) {
      res.termination = Termination::converged;
      break;
    }
    if (it >= cfg.max_iters) {
      res.termination = Termination::max_iters;
      break;
    }

    // Backtracking; the round-off allowance keeps the search from stalling
    // once energy differences reach machine precision.
    bool accepted = false;
    Field trial{grid};
    double trial_energy = 0;
    while (tau >= 1e-14) {
      Field moved = w;
      moved.values() -= tau * d.values();
      try {
        trial = project_constraint(p, lambda, moved, cfg.t_max, keep_mean);
        trial_energy = dirichlet_energy(trial);
        if (trial_energy <= energy - cfg.armijo * tau * gn * gn ||
            trial_energy <= energy + 1e-14 * std::abs(energy)) {
          accepted = true;
          break;
        }
      } catch (const Error& e) {
        if (e.code() != ErrorCode::RootNotBracketed) throw;
      }
      tau *= 0.5;
    }
    if (!accepted) {
      res.termination = Termination::stalled;
      break;
    }
    w = std::move(trial);
    energy = trial_energy;
    tau = std::min(2.0 * tau, cfg.step_max);
  }

  res.w = w;
  res.beta = dirichlet_energy(w);
  res.grad_norm = gn;
  res.iters = it;
  res.descent_multiplier = c;
  res.constraint_residual = std::abs(integrate_exp(w, f));
  res.mean_residual = std::abs(mean(w));
  res.converged = res.termination == Termination::converged;

  const Multipliers m = extract_multiplier(p, lambda, w);
  res.mu = m.mu_a;
  res.mu_b = m.mu_b;
  res.multiplier_gap = m.gap;
  if (!(m.mu_a > 0) || !(c > 0)) {
    std::ostringstream os;
    os << "multiplier " << m.mu_a << " (descent estimate " << c << ") is not positive";
    throw Error(ErrorCode::MultiplierNonpositive, os.str());
  }
  // The solution is assembled with the discrete stationarity multiplier; the
  // two continuum formulas are reported alongside for comparison.
  res.u = w;
  res.u.values() += 0.5 * std::log(c);
  bool hit = false;
  exp2(res.u, Dealias::none, &hit);
  res.exp_capped = capped || hit;
  res.pde_residual = pde_residual(p, lambda, res.u);
  res.pde_residual_rel = relative_pde_residual(p, lambda, res.u);
  return res;
}

}  // namespace curvtorus

#include "curvtorus/comparison.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <variant>

namespace curvtorus {

namespace {

// Distance from the chart origin for node (i, j) of an n-point unit grid.
double node_radius(int i, int j, int n) {
  const double x = std::min(i, n - i) / static_cast<double>(n);
  const double y = std::min(j, n - j) / static_cast<double>(n);
  return std::hypot(x, y);
}

int chart_resolution(double side, double inner, int cap) {
  const double want = std::max(64.0, 8.0 * side / inner);
  if (want > cap) return cap;
  return static_cast<int>(std::bit_ceil(static_cast<unsigned>(std::ceil(want))));
}

// z(alpha) and z'(alpha) on either the torus grid or the refinement chart.
struct AlphaQuadrature {
  double base;                // int f_lambda over the torus
  std::vector<double> f;      // f_lambda at support nodes
  std::vector<double> phi;    // phi at support nodes
  double weight;              // quadrature weight per node

  std::pair<double, double> eval(double alpha) const {
    double z = base, dz = 0;
    for (std::size_t k = 0; k < f.size(); ++k) {
      const double e = std::exp(2.0 * alpha * phi[k]);
      z += weight * f[k] * (e - 1.0);
      dz += weight * 2.0 * f[k] * phi[k] * e;
    }
    return {z, dz};
  }
};

bool closed_form(const Problem& p) { return !std::holds_alternative<TabulatedFamily>(p.family()); }

}  // namespace

double phi_profile(double lambda, double L, double r) {
  const double inner = std::pow(lambda, 1.5) / L;
  const double outer = std::sqrt(lambda) / L;
  if (r <= inner) return std::log(1.0 / lambda);
  if (r <= outer) return std::log(outer / r);
  return 0.0;
}

ComparisonFn build_phi(const Problem& p, double lambda, const PhiOptions& opts) {
  if (!(lambda > 0 && lambda < 1)) throw Error(ErrorCode::InvalidArgument, "comparison needs 0 < lambda < 1");
  if (p.maxima().empty() || !std::isfinite(p.L())) {
    throw Error(ErrorCode::InvalidArgument, "comparison needs a maximum of f0 and the constant L");
  }
  const Point center = p.maxima().front().p;
  const double L = p.L();
  const Grid& grid = p.grid();
  ComparisonFn c{.lambda = lambda,
                 .center = center,
                 .L = L,
                 .inner_radius = std::pow(lambda, 1.5) / L,
                 .outer_radius = std::sqrt(lambda) / L,
                 .field = Field::from_function(grid, [&](double x, double y) {
                   return phi_profile(lambda, L, periodic_distance(center, Point(x, y)));
                 }),
                 .energy = 0,
                 .energy_grid = 0,
                 .energy_analytic = 2.0 * std::numbers::pi * std::log(1.0 / lambda),
                 .refined = false,
                 .chart_n = 0,
                 .chart_side = 0,
                 .support_min_f = std::numeric_limits<double>::infinity()};
  if (!(c.outer_radius < 0.25)) {
    throw Error(ErrorCode::ChartTooLarge, "support radius sqrt(lambda)/L must stay below 0.25");
  }
  c.energy_grid = dirichlet_energy(c.field);
  for (int i = 0; i < grid.n(); ++i) {
    for (int j = 0; j < grid.n(); ++j) {
      if (c.field(i, j) > 0) c.support_min_f = std::min(c.support_min_f, p.f0()(i, j) + lambda);
    }
  }

  c.energy = c.energy_grid;
  if (c.inner_radius < 2.0 * grid.spacing()) {
    if (!opts.auto_refine) {
      std::ostringstream os;
      os << "inner plateau radius " << c.inner_radius << " is below two grid cells (" << 2 * grid.spacing() << ")";
      throw Error(ErrorCode::UnresolvedCore, os.str());
    }
    // The Dirichlet energy is scale invariant in two dimensions, so the local
    // chart of side s is mapped onto a unit torus with radii divided by s.
    c.chart_side = 2.5 * c.outer_radius;
    c.chart_n = chart_resolution(c.chart_side, c.inner_radius, opts.max_chart_n);
    const Grid chart(c.chart_n);
    const double s = c.chart_side;
    const Field local = Field::from_function(chart, [&](double x, double y) {
      return phi_profile(lambda, c.L * s, std::hypot(std::min(x, 1 - x), std::min(y, 1 - y)));
    });
    c.energy = dirichlet_energy(local);
    c.refined = true;
  }
  return c;
}

AlphaResult solve_alpha(const Problem& p, double lambda, const ComparisonFn& phi) {
  AlphaQuadrature q;
  q.base = p.f0_bar() + lambda;
  if (!(q.base < 0)) throw Error(ErrorCode::NoSignChange, "z(0) = mean f_lambda is not negative");
  const bool chart = phi.refined && closed_form(p);
  if (chart) {
    const int n = phi.chart_n;
    const double s = phi.chart_side;
    q.weight = (s / n) * (s / n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        const double r = s * node_radius(i, j, n);
        if (r > phi.outer_radius) continue;
        const double dx = s * (i <= n / 2 ? i : i - n) / n;
        const double dy = s * (j <= n / 2 ? j : j - n) / n;
        q.f.push_back(p.f0_at(phi.center + Point(dx, dy)) + lambda);
        q.phi.push_back(phi_profile(lambda, phi.L, r));
      }
    }
  } else {
    const Grid& g = p.grid();
    q.weight = 1.0 / static_cast<double>(g.size());
    for (int i = 0; i < g.n(); ++i) {
      for (int j = 0; j < g.n(); ++j) {
        if (phi.field(i, j) > 0) {
          q.f.push_back(p.f0()(i, j) + lambda);
          q.phi.push_back(phi.field(i, j));
        }
      }
    }
  }

  // Bracket by doubling while exponents stay representable.
  const double alpha_cap = 300.0 / std::log(1.0 / lambda);
  double lo = 0, hi = 1;
  while (q.eval(hi).first < 0) {
    lo = hi;
    hi *= 2;
    if (hi > alpha_cap) throw Error(ErrorCode::NoSignChange, "z(alpha) stays negative up to the exponent cap");
  }
  double a = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    const auto [z, dz] = q.eval(a);
    if (z < 0) {
      lo = a;
    } else {
      hi = a;
    }
    double next = dz > 0 ? a - z / dz : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    const double change = std::abs(next - a);
    a = next;
    if (change < 1e-15 * std::max(1.0, a)) break;
  }
  return {a, std::abs(q.eval(a).first), chart};
}

double I_map(const Problem& p, const Field& u) {
  if (!u.all_finite()) throw Error(ErrorCode::NonFinite, "I map input is not finite");
  const double top = u.max();
  const Field::Array e = (2.0 * (u.values() - top)).exp();
  return -(p.f0().values() * e).sum() / e.sum();
}

EpsilonStar epsilon_star(const Field& u_star, const ComparisonFn& phi) {
  const double e_phi = dirichlet_energy(phi.field);
  if (!(e_phi > 0)) throw Error(ErrorCode::DivisionDegenerate, "comparison function has zero energy");
  const double eps = 2.0 * inner_grad(u_star, phi.field) / e_phi;
  // positive beyond round-off of the two inner products
  return {eps, eps > 1e-12 && eps < 6};
}

MonotonicityProbe probe_h(const Problem& p, double lambda_star, const Field& u_star, const ComparisonFn& phi,
                          double eps_star, int k) {
  if (!(eps_star > 0)) throw Error(ErrorCode::InvalidArgument, "probe needs eps* > 0");
  if (k < 1) throw Error(ErrorCode::InvalidArgument, "probe needs at least one interval");
  const double e_phi = dirichlet_energy(phi.field);
  const double e_u = dirichlet_energy(u_star);
  auto shifted = [&](double eps) {
    Field v = u_star;
    v.values() -= eps * phi.field.values();
    return v;
  };
  auto h = [&](double eps) { return I_map(p, shifted(eps)); };
  auto h_prime = [&](double eps) {
    const Field v = shifted(eps);
    const double hv = I_map(p, v);
    const Field::Array e = (2.0 * (v.values() - v.max())).exp();
    return 2.0 * ((p.f0().values() + hv) * phi.field.values() * e).sum() / e.sum();
  };

  MonotonicityProbe probe;
  probe.lambda_star = lambda_star;
  probe.eps_star = eps_star;
  probe.min_h_prime = std::numeric_limits<double>::infinity();
  probe.max_fd_rel_error = 0;
  probe.max_identity_error = 0;
  constexpr double kStep = 1e-4;
  for (int i = 0; i <= k; ++i) {
    const double eps = eps_star * i / k;
    HSample s{eps, h(eps), h_prime(eps), (h(eps + kStep) - h(eps - kStep)) / (2 * kStep)};
    probe.min_h_prime = std::min(probe.min_h_prime, s.h_prime);
    probe.max_fd_rel_error = std::max(probe.max_fd_rel_error, std::abs(s.h_prime_fd - s.h_prime) / std::abs(s.h_prime));
    const double direct = dirichlet_energy(shifted(eps));
    const double expanded = e_u - eps * (eps_star - eps) * e_phi;
    probe.max_identity_error = std::max(probe.max_identity_error, std::abs(direct - expanded) / std::max(e_u, 1e-300));
    probe.h_samples.push_back(s);
  }
  probe.ell = probe.h_samples.back().h;
  return probe;
}

double closed_form_lambda_sigma(const Problem& p, double sigma) {
  if (!(sigma > 0)) throw Error(ErrorCode::InvalidArgument, "sigma must be positive");
  const double K = 2.0 * p.L() * p.L() * p.f0_sup_norm() / std::numbers::pi;
  return std::pow(K, -1.0 / (2.0 * sigma));
}

double empirical_lambda_sigma(std::vector<AlphaSample> samples, double sigma) {
  std::sort(samples.begin(), samples.end(), [](const auto& a, const auto& b) { return a.lambda < b.lambda; });
  double best = 0;
  for (const auto& s : samples) {
    if (!(s.alpha <= sigma + 2)) break;
    best = s.lambda;
  }
  return best;
}

}  // namespace curvtorus

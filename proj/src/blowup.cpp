#include "curvtorus/blowup.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace curvtorus {

namespace {

double nearest_maximum(const Problem& p, const Point& x) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& mx : p.maxima()) best = std::min(best, periodic_distance(mx.p, x));
  return best;
}

}  // namespace

std::vector<Peak> locate_peaks(const Field& u, const Problem& p, const PeakOptions& opts) {
  const int n = u.grid().n();
  const double h = u.grid().spacing();
  const double base = mean(u);
  auto at = [&](int i, int j) { return u(((i % n) + n) % n, ((j % n) + n) % n); };
  std::vector<Peak> peaks;
  std::vector<std::pair<int, int>> nodes;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double v = u(i, j);
      if (v - base < opts.prominence) continue;
      bool is_max = true;
      for (int di = -1; di <= 1 && is_max; ++di) {
        for (int dj = -1; dj <= 1; ++dj) {
          if ((di || dj) && at(i + di, j + dj) > v) {
            is_max = false;
            break;
          }
        }
      }
      if (is_max) nodes.emplace_back(i, j);
    }
  }
  if (nodes.empty()) return peaks;
  const Interpolant interp(u);
  for (const auto& [i, j] : nodes) {
    Eigen::Vector2d g((at(i + 1, j) - at(i - 1, j)) / (2 * h), (at(i, j + 1) - at(i, j - 1)) / (2 * h));
    Eigen::Matrix2d H;
    H(0, 0) = (at(i + 1, j) - 2 * at(i, j) + at(i - 1, j)) / (h * h);
    H(1, 1) = (at(i, j + 1) - 2 * at(i, j) + at(i, j - 1)) / (h * h);
    H(0, 1) = H(1, 0) = (at(i + 1, j + 1) - at(i + 1, j - 1) - at(i - 1, j + 1) + at(i - 1, j - 1)) / (4 * h * h);
    Point q = u.grid().point(i, j);
    if (H.determinant() > 0 && H(0, 0) < 0) {
      const Eigen::Vector2d step = -(H.inverse() * g);
      if (step.norm() <= h) q += step;
    }
    q = wrap_point(q);
    bool duplicate = false;
    for (const auto& pk : peaks) {
      if (periodic_distance(pk.p, q) < 1.5 * h) duplicate = true;
    }
    if (duplicate) continue;
    peaks.push_back({q, interp(q), nearest_maximum(p, q), std::numeric_limits<double>::quiet_NaN()});
  }
  std::sort(peaks.begin(), peaks.end(), [](const Peak& a, const Peak& b) { return a.value > b.value; });
  if (static_cast<int>(peaks.size()) > opts.max_peaks) peaks.resize(opts.max_peaks);
  return peaks;
}

double bubble_model(double radius) { return std::log(2.0 / (1.0 + radius * radius)); }

std::vector<double> radial_profile(double w0, double k, const std::vector<double>& radii, int steps_per_unit) {
  auto rhs = [k](double rho, double w, double dw) {
    return std::array<double, 2>{dw, -dw / rho - (1.0 + k * rho * rho) * std::exp(2.0 * w)};
  };
  // Series start away from the coordinate singularity.
  const double e0 = std::exp(2.0 * w0);
  double rho = 1e-6;
  double w = w0 - e0 * rho * rho / 4.0;
  double dw = -e0 * rho / 2.0;
  std::vector<double> out;
  out.reserve(radii.size());
  for (double target : radii) {
    if (target <= rho) {
      out.push_back(target <= 1e-6 ? w0 - e0 * target * target / 4.0 : w);
      continue;
    }
    const int steps = std::max(1, static_cast<int>(std::ceil((target - rho) * steps_per_unit)));
    const double hstep = (target - rho) / steps;
    for (int s = 0; s < steps; ++s) {
      const auto k1 = rhs(rho, w, dw);
      const auto k2 = rhs(rho + hstep / 2, w + hstep / 2 * k1[0], dw + hstep / 2 * k1[1]);
      const auto k3 = rhs(rho + hstep / 2, w + hstep / 2 * k2[0], dw + hstep / 2 * k2[1]);
      const auto k4 = rhs(rho + hstep, w + hstep * k3[0], dw + hstep * k3[1]);
      w += hstep / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]);
      dw += hstep / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1]);
      rho += hstep;
    }
    out.push_back(w);
  }
  return out;
}

double local_mass(const Problem& p, const Field& u, double lambda, const Point& center, double radius) {
  if (!(radius < 0.25)) throw Error(ErrorCode::ChartTooLarge, "mass radius must stay below 0.25");
  if (!(u.grid() == p.grid())) throw Error(ErrorCode::GridMismatch, "field and problem grids differ");
  const Grid& g = u.grid();
  double sum = 0;
  for (int i = 0; i < g.n(); ++i) {
    for (int j = 0; j < g.n(); ++j) {
      if (periodic_distance(center, g.point(i, j)) > radius) continue;
      const double f = p.f0()(i, j) + lambda;
      if (f > 0) sum += f * std::exp(2.0 * std::min(u(i, j), kExpCap / 2));
    }
  }
  return sum / static_cast<double>(g.size());
}

BubbleReport classify_and_rescale(const Problem& p, const Field& u, double lambda, const Peak& peak,
                                  const BubbleOptions& opts) {
  if (!(lambda > 0)) throw Error(ErrorCode::InvalidArgument, "lambda must be positive");
  if (opts.rays < 1 || opts.radii < 2 || !(opts.R > 0) || !(opts.dev_R > 0)) {
    throw Error(ErrorCode::InvalidArgument, "bad profile sampling options");
  }
  const Interpolant interp(u);
  const double u_p = interp(peak.p);
  if (u_p < opts.peak_min) {
    std::ostringstream os;
    os << "peak value " << u_p << " is below " << opts.peak_min;
    throw Error(ErrorCode::PeakTooWeak, os.str());
  }
  BubbleReport rep{};
  rep.lambda = lambda;
  rep.p_n = peak.p;
  rep.dist_to_f0max = nearest_maximum(p, peak.p);
  rep.u_peak = u_p;
  rep.f_lambda_at_peak = p.f0_at(peak.p) + lambda;
  const double sq = std::sqrt(lambda);
  const double r1 = rep.f_lambda_at_peak > 0 ? 2.0 * std::exp(-u_p) / std::sqrt(rep.f_lambda_at_peak)
                                             : std::numeric_limits<double>::infinity();
  rep.scale_ratio = r1 / sq;
  rep.regime = rep.scale_ratio < opts.regime_ratio ? 1 : 2;
  rep.r_n = rep.regime == 1 ? r1 : sq;

  std::vector<Point> offsets;
  std::vector<int> ray_of;
  std::vector<double> radius_of;
  for (int a = 0; a < opts.rays; ++a) {
    const double th = 2.0 * std::numbers::pi * a / opts.rays;
    for (int k = 0; k < opts.radii; ++k) {
      const double rho = opts.R * k / (opts.radii - 1);
      offsets.emplace_back(rho * std::cos(th), rho * std::sin(th));
      ray_of.push_back(a);
      radius_of.push_back(rho);
    }
  }
  const std::vector<double> values = sample_rescaled(u, peak.p, rep.r_n, offsets);
  const std::vector<double> lap = sample_rescaled(laplacian(u), peak.p, rep.r_n, offsets);
  const double r2 = rep.r_n * rep.r_n;
  const std::size_t m = offsets.size();

  std::vector<double> w(m), lap_w(m), K(m, 1.0), model(m);
  for (std::size_t s = 0; s < m; ++s) lap_w[s] = r2 * lap[s];
  if (rep.regime == 1) {
    rep.c_fit = 0;
    for (std::size_t s = 0; s < m; ++s) {
      w[s] = values[s] - u_p + std::log(2.0);
      model[s] = bubble_model(radius_of[s]);
    }
  } else {
    const Eigen::Matrix2d A = 0.5 * p.f0_hessian_at(peak.p);
    double num = 0, den = 0;
    std::vector<double> w0(m);
    for (std::size_t s = 0; s < m; ++s) {
      w0[s] = values[s] + std::log(lambda);
      K[s] = 1.0 + offsets[s].dot(A * offsets[s]);
      if (radius_of[s] <= opts.dev_R) {
        const double e = std::exp(2.0 * w0[s]);
        num += -lap_w[s] * K[s] * e;
        den += K[s] * K[s] * e * e;
      }
    }
    if (!(num > 0 && den > 0)) throw Error(ErrorCode::DivisionDegenerate, "cannot fit the regime-2 constant");
    rep.c_fit = 0.5 * std::log(num / den);
    for (std::size_t s = 0; s < m; ++s) w[s] = w0[s] + rep.c_fit;
    std::vector<double> radii;
    for (int k = 0; k < opts.radii; ++k) radii.push_back(opts.R * k / (opts.radii - 1));
    const std::vector<double> radial = radial_profile(w[0], 0.5 * A.trace(), radii);
    for (std::size_t s = 0; s < m; ++s) model[s] = radial[s % opts.radii];
  }

  rep.sup_dev = 0;
  rep.rescaled_residual = 0;
  for (std::size_t s = 0; s < m; ++s) {
    rep.profile.push_back({ray_of[s], radius_of[s], w[s], model[s]});
    if (radius_of[s] <= opts.dev_R) {
      rep.sup_dev = std::max(rep.sup_dev, std::abs(w[s] - model[s]));
      rep.rescaled_residual = std::max(rep.rescaled_residual, std::abs(lap_w[s] + K[s] * std::exp(2.0 * w[s])));
    }
  }
  rep.mass_radius = std::min(opts.mass_factor * rep.r_n, 0.24);
  rep.local_mass = local_mass(p, u, lambda, peak.p, rep.mass_radius);
  return rep;
}

std::string_view to_string(DichotomyCase c) {
  switch (c) {
    case DichotomyCase::case_i: return "case_i";
    case DichotomyCase::case_ii: return "case_ii";
    case DichotomyCase::inconclusive: return "inconclusive";
  }
  return "unknown";
}

double omega_min(const Field& u, const Problem& p, double distance) {
  const Grid& g = u.grid();
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < g.n(); ++i) {
    for (int j = 0; j < g.n(); ++j) {
      if (nearest_maximum(p, g.point(i, j)) >= distance) best = std::min(best, u(i, j));
    }
  }
  if (!std::isfinite(best)) throw Error(ErrorCode::InvalidArgument, "the set away from the maxima is empty");
  return best;
}

DichotomyResult dichotomy_detect(std::vector<DichotomySample> samples) {
  if (samples.size() < 3) throw Error(ErrorCode::InvalidArgument, "dichotomy needs at least three samples");
  std::sort(samples.begin(), samples.end(), [](const auto& a, const auto& b) { return a.lambda > b.lambda; });
  DichotomyResult res{DichotomyCase::inconclusive, {}, 0};
  for (std::size_t k = 0; k + 1 < samples.size(); ++k) {
    const double dl = std::log(samples[k].lambda / samples[k + 1].lambda);
    if (!(dl > 0)) throw Error(ErrorCode::InvalidArgument, "dichotomy samples need distinct lambda");
    res.slopes.push_back((samples[k + 1].min_omega - samples[k].min_omega) / dl);
  }
  res.last_slope = res.slopes.back();
  const bool monotone_down = std::all_of(res.slopes.begin(), res.slopes.end(), [](double s) { return s < 0; });
  if (res.last_slope <= -0.1 && monotone_down) {
    res.verdict = DichotomyCase::case_i;
  } else if (std::abs(res.last_slope) < 0.1) {
    res.verdict = DichotomyCase::case_ii;
  }
  return res;
}

}  // namespace curvtorus

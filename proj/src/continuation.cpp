#include "curvtorus/continuation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace curvtorus {

namespace {

std::vector<double> parse_list(const std::string& body) {
  std::vector<double> out;
  std::stringstream ss(body);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw Error(ErrorCode::ConfigError, "bad number '" + item + "' in schedule");
    }
  }
  if (out.empty()) throw Error(ErrorCode::ConfigError, "empty schedule list");
  return out;
}

std::vector<double> split_numbers(const std::string& body, char sep, std::size_t count, const std::string& spec) {
  std::vector<double> out;
  std::stringstream ss(body);
  std::string item;
  while (std::getline(ss, item, sep)) {
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw Error(ErrorCode::ConfigError, "bad schedule '" + spec + "'");
    }
  }
  if (out.size() != count) throw Error(ErrorCode::ConfigError, "bad schedule '" + spec + "'");
  return out;
}

// Sub-grid location of the maximum of u by a parabola through the three
// nodes along each axis.
Point refined_argmax(const Field& u) {
  const int n = u.grid().n();
  Eigen::Index bi = 0, bj = 0;
  u.values().maxCoeff(&bi, &bj);
  const int i = static_cast<int>(bi), j = static_cast<int>(bj);
  auto vertex = [](double m, double c, double p) {
    const double denom = m - 2 * c + p;
    return denom < 0 ? 0.5 * (m - p) / denom : 0.0;
  };
  const double dx = vertex(u((i - 1 + n) % n, j), u(i, j), u((i + 1) % n, j));
  const double dy = vertex(u(i, (j - 1 + n) % n), u(i, j), u(i, (j + 1) % n));
  return wrap_point(u.grid().point(i, j) + u.grid().spacing() * Point(dx, dy));
}

bool needs_escalation(const MinimizeResult& r, const SolverConfig& cfg, double gap_tol) {
  return !r.converged || r.pde_residual_rel > cfg.res_tol || r.multiplier_gap > gap_tol;
}

}  // namespace

ContinuationRecord make_record(const Problem& p, double lambda, const MinimizeResult& r, double peak_min) {
  const Field one = Field::constant(p.grid(), 1.0);
  const Field f = f_lambda(p, lambda);
  Field abs_plus = p.f0();
  abs_plus.values() = abs_plus.values().abs() + lambda;
  ContinuationRecord rec;
  rec.lambda = lambda;
  rec.beta = r.beta;
  rec.mu = r.mu;
  rec.vol = integrate_exp(r.u, one);
  rec.lambda_times_vol = lambda * rec.vol;
  rec.total_curvature = integrate_exp(r.u, abs_plus);
  rec.gb_residual = std::abs(integrate_exp(r.u, f));
  rec.u_max = r.u.max();
  rec.u_min = r.u.min();
  rec.w_sup = r.w.sup_norm();
  if (rec.u_max >= peak_min) rec.blowup_point = refined_argmax(r.u);
  rec.converged = r.converged;
  return rec;
}

std::vector<SweepRow> sweep(const Problem& p, const std::vector<double>& schedule, const SweepOptions& opts) {
  opts.solver.validate();
  Problem current = p;
  std::optional<Field> warm = opts.solver.warm_start;
  std::vector<SweepRow> rows;
  for (double lambda : schedule) {
    SweepRow row{};
    row.record.lambda = lambda;
    bool escalated = false;
    for (;;) {
      SolverConfig cfg = opts.solver;
      cfg.warm_start = warm;
      try {
        MinimizeResult r = minimize(current, lambda, cfg);
        if (opts.escalate && needs_escalation(r, cfg, opts.gap_tol) && current.grid().n() * 2 <= opts.max_n) {
          current = current.on_grid(Grid(current.grid().n() * 2));
          warm = r.w;
          escalated = true;
          continue;
        }
        row.record = make_record(current, lambda, r, opts.peak_min);
        row.diag.iters = r.iters;
        row.diag.mu_b = r.mu_b;
        row.diag.multiplier_gap = r.multiplier_gap;
        row.diag.pde_residual = r.pde_residual;
        row.diag.pde_residual_rel = r.pde_residual_rel;
        Field fplus = f_lambda(current, lambda);
        Field fminus = fplus;
        fplus.values() = fplus.values().max(0.0);
        fminus.values() = (-fminus.values()).max(0.0);
        row.diag.positive_mass = integrate_exp(r.u, fplus);
        row.diag.negative_mass = integrate_exp(r.u, fminus);
        row.diag.termination = std::string(to_string(r.termination));
        warm = r.w;
        if (opts.keep_fields) {
          row.w = std::move(r.w);
          row.u = std::move(r.u);
        }
      } catch (const Error& e) {
        row.record.converged = false;
        row.record.beta = row.record.mu = std::numeric_limits<double>::quiet_NaN();
        row.diag.error = e.what();
        row.diag.termination = "error";
      }
      break;
    }
    row.diag.n = current.grid().n();
    row.diag.escalated = escalated;
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<double> parse_schedule(const std::string& spec, const Problem& p) {
  const auto colon = spec.find(':');
  if (colon == std::string::npos) throw Error(ErrorCode::ConfigError, "schedule needs a kind prefix: " + spec);
  const std::string kind = spec.substr(0, colon);
  const std::string body = spec.substr(colon + 1);
  std::vector<double> out;
  if (kind == "geo") {
    const auto v = split_numbers(body, ':', 3, spec);
    const double lo = v[0], hi = v[1], ratio = v[2];
    if (!(lo > 0 && hi >= lo && ratio > 0 && ratio < 1)) {
      throw Error(ErrorCode::ConfigError, "geo schedule needs 0 < lo <= hi and 0 < ratio < 1");
    }
    for (double l = hi; l > lo * 1.1; l *= ratio) out.push_back(l);
    out.push_back(lo);
  } else if (kind == "list") {
    out = parse_list(body);
  } else if (kind == "lmax") {
    for (double frac : parse_list(body)) out.push_back(frac * p.lambda_max());
  } else if (kind == "gap") {
    const auto v = split_numbers(body, ':', 3, spec);
    const double d_hi = v[0], d_lo = v[1], ratio = v[2];
    if (!(d_lo > 0 && d_hi >= d_lo && d_hi < 1 && ratio > 0 && ratio < 1)) {
      throw Error(ErrorCode::ConfigError, "gap schedule needs 0 < d_lo <= d_hi < 1 and 0 < ratio < 1");
    }
    for (double d = d_hi; d > d_lo * 1.1; d *= ratio) out.push_back(p.lambda_max() * (1 - d));
    out.push_back(p.lambda_max() * (1 - d_lo));
  } else {
    throw Error(ErrorCode::ConfigError, "unknown schedule kind '" + kind + "'");
  }
  for (double l : out) {
    if (!std::isfinite(l)) throw Error(ErrorCode::ConfigError, "non-finite lambda in schedule");
  }
  const bool ascending = std::is_sorted(out.begin(), out.end());
  const bool descending = std::is_sorted(out.rbegin(), out.rend());
  if (!ascending && !descending) throw Error(ErrorCode::ConfigError, "schedule must be monotone");
  return out;
}

BetaPrimeEstimate estimate_beta_prime(std::vector<ContinuationRecord> records, double small_max) {
  std::erase_if(records, [](const ContinuationRecord& r) { return !r.converged; });
  if (records.size() < 3) throw Error(ErrorCode::InvalidArgument, "need at least three converged records");
  std::sort(records.begin(), records.end(), [](const auto& a, const auto& b) { return a.lambda < b.lambda; });
  BetaPrimeEstimate est{{}, 0};
  for (std::size_t k = 1; k + 1 < records.size(); ++k) {
    const double l0 = std::log(records[k - 1].lambda), l1 = std::log(records[k].lambda),
                 l2 = std::log(records[k + 1].lambda);
    const double b0 = records[k - 1].beta, b1 = records[k].beta, b2 = records[k + 1].beta;
    const double h0 = l1 - l0, h1 = l2 - l1;
    // Derivative at l1 of the parabola through the three points.
    const double dbdl = (-h1 / (h0 * (h0 + h1))) * b0 + ((h1 - h0) / (h0 * h1)) * b1 + (h0 / (h1 * (h0 + h1))) * b2;
    const double lam = records[k].lambda;
    est.samples.push_back({lam, dbdl / lam});
    if (lam <= small_max) est.c0 = std::max(est.c0, std::abs(dbdl));
  }
  return est;
}

SweepSummary summarize(const std::vector<ContinuationRecord>& all) {
  std::vector<ContinuationRecord> records;
  for (const auto& r : all) {
    if (r.converged) records.push_back(r);
  }
  std::sort(records.begin(), records.end(), [](const auto& a, const auto& b) { return a.lambda < b.lambda; });
  SweepSummary s{true, 0, 0, 0, static_cast<int>(records.size())};
  for (std::size_t k = 0; k + 1 < records.size(); ++k) {
    if (!(records[k].beta > records[k + 1].beta)) s.beta_monotone = false;
  }
  // Extend the monotone prefix from the smallest lambda upward.
  if (!records.empty()) s.lambda0_empirical = records.front().lambda;
  for (std::size_t k = 0; k + 1 < records.size(); ++k) {
    if (!(records[k].beta > records[k + 1].beta)) break;
    s.lambda0_empirical = records[k + 1].lambda;
  }
  if (!records.empty()) {
    double top = 0;
    for (const auto& r : records) top = std::max(top, r.lambda_times_vol);
    s.lambda_vol_max_over_last = top / records.front().lambda_times_vol;
  }
  for (const auto& r : records) s.gb_max = std::max(s.gb_max, r.gb_residual);
  return s;
}

SliceResult slice_construct(const Problem& p, double lambda) {
  Field centered = p.f0();
  centered.values() -= p.f0_bar();
  const double spread = inner(centered, centered);
  if (!(spread > 0)) throw Error(ErrorCode::DivisionDegenerate, "f0 is constant");
  const double s0 = -1.0 / (2.0 * spread);
  Field v0 = centered;
  v0.values() *= s0 * (lambda - p.lambda_max());
  Field projected = project_constraint(p, lambda, v0);
  Field diff = projected;
  diff.values() -= v0.values();
  return {s0, projected, h1_norm(diff), dirichlet_energy(projected)};
}

LambdaMaxSummary lambda_max_report(const Problem& p, std::vector<ContinuationRecord> records) {
  const double lmax = p.lambda_max();
  std::erase_if(records, [&](const ContinuationRecord& r) { return !r.converged || r.lambda / lmax < 0.9 - 1e-12; });
  if (records.size() < 3) throw Error(ErrorCode::InvalidArgument, "need three converged rows with lambda >= 0.9 lambda_max");
  std::sort(records.begin(), records.end(), [](const auto& a, const auto& b) { return a.lambda < b.lambda; });
  LambdaMaxSummary s;
  s.beta_decreasing = s.mu_decreasing = s.w_sup_decreasing = s.u_max_decreasing = true;
  s.theta_ratio_decreasing = s.slice_bound_holds = true;
  s.s0 = 0;
  for (const auto& r : records) {
    const SliceResult slice = slice_construct(p, r.lambda);
    s.s0 = slice.s0;
    const double gap = std::abs(r.lambda - lmax);
    s.rows.push_back({r.lambda / lmax, r.beta, r.mu, r.w_sup, r.u_max, slice.energy_upper,
                      gap > 0 ? slice.theta_norm / gap : 0.0});
    if (!(r.beta <= slice.energy_upper * (1 + 1e-9) + 1e-14)) s.slice_bound_holds = false;
  }
  for (std::size_t k = 0; k + 1 < s.rows.size(); ++k) {
    const auto& a = s.rows[k];
    const auto& b = s.rows[k + 1];
    if (!(b.beta < a.beta)) s.beta_decreasing = false;
    if (!(b.mu < a.mu)) s.mu_decreasing = false;
    if (!(b.w_sup < a.w_sup)) s.w_sup_decreasing = false;
    if (!(b.u_max < a.u_max)) s.u_max_decreasing = false;
    if (!(b.theta_ratio < a.theta_ratio)) s.theta_ratio_decreasing = false;
  }
  return s;
}

MinimizeResult solve_by_continuation(const Problem& p, double lambda, const SolverConfig& cfg, double ratio) {
  if (!(ratio > 0 && ratio < 1)) throw Error(ErrorCode::InvalidArgument, "ratio must lie in (0, 1)");
  SolverConfig chain = cfg;
  double start = 0.5 * p.lambda_max();
  if (lambda >= start) return minimize(p, lambda, cfg);
  for (double l = start; l > lambda / ratio * (1 + 1e-12); l *= ratio) {
    chain.warm_start = minimize(p, l, chain).w;
  }
  return minimize(p, lambda, chain);
}

}  // namespace curvtorus

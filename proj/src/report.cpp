#include "curvtorus/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>

namespace curvtorus {

namespace {

Json point_json(const Point& p) { return Json::array({p.x(), p.y()}); }

// NaN and infinities become null so the output stays valid JSON.
Json num(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

}  // namespace

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string records_csv(const std::vector<ContinuationRecord>& records) {
  std::string out =
      "lambda,beta,mu,vol,lambda_times_vol,total_curvature,gb_residual,u_max,u_min,w_sup,blowup_point,converged\n";
  for (const auto& r : records) {
    for (double v : {r.lambda, r.beta, r.mu, r.vol, r.lambda_times_vol, r.total_curvature, r.gb_residual, r.u_max,
                     r.u_min, r.w_sup}) {
      out += format_number(v);
      out += ',';
    }
    if (r.blowup_point) out += format_number(r.blowup_point->x()) + ";" + format_number(r.blowup_point->y());
    out += ',';
    out += r.converged ? "true" : "false";
    out += '\n';
  }
  return out;
}

Json metadata(const RunConfig& cfg, const std::string& command) {
  Json config = Json::object();
  const std::string canon = cfg.canonical();
  std::size_t start = 0;
  while (start < canon.size()) {
    const auto end = canon.find('\n', start);
    const std::string line = canon.substr(start, end - start);
    const auto eq = line.find('=');
    config[line.substr(0, eq)] = line.substr(eq + 1);
    start = end + 1;
  }
  return Json{{"schema", kSchemaVersion},
              {"version", kArtifactVersion},
              {"command", command},
              {"config_hash", cfg.hash_hex()},
              {"config", config}};
}

Json to_json(const MinimizeResult& r) {
  return Json{{"n", r.w.grid().n()},
              {"beta", num(r.beta)},
              {"mu", num(r.mu)},
              {"mu_b", num(r.mu_b)},
              {"multiplier_gap", num(r.multiplier_gap)},
              {"descent_multiplier", num(r.descent_multiplier)},
              {"pde_residual", num(r.pde_residual)},
              {"pde_residual_rel", num(r.pde_residual_rel)},
              {"constraint_residual", num(r.constraint_residual)},
              {"mean_residual", num(r.mean_residual)},
              {"grad_norm", num(r.grad_norm)},
              {"iters", r.iters},
              {"converged", r.converged},
              {"termination", to_string(r.termination)},
              {"exp_capped", r.exp_capped},
              {"u_max", num(r.u.max())},
              {"u_min", num(r.u.min())},
              {"w_sup", num(r.w.sup_norm())}};
}

Json to_json(const ContinuationRecord& r) {
  return Json{{"lambda", num(r.lambda)},
              {"beta", num(r.beta)},
              {"mu", num(r.mu)},
              {"vol", num(r.vol)},
              {"lambda_times_vol", num(r.lambda_times_vol)},
              {"total_curvature", num(r.total_curvature)},
              {"gb_residual", num(r.gb_residual)},
              {"u_max", num(r.u_max)},
              {"u_min", num(r.u_min)},
              {"w_sup", num(r.w_sup)},
              {"blowup_point", r.blowup_point ? point_json(*r.blowup_point) : Json(nullptr)},
              {"converged", r.converged}};
}

Json to_json(const RecordDiagnostics& d) {
  return Json{{"n", d.n},
              {"iters", d.iters},
              {"mu_b", num(d.mu_b)},
              {"multiplier_gap", num(d.multiplier_gap)},
              {"pde_residual", num(d.pde_residual)},
              {"pde_residual_rel", num(d.pde_residual_rel)},
              {"positive_mass", num(d.positive_mass)},
              {"negative_mass", num(d.negative_mass)},
              {"termination", d.termination},
              {"escalated", d.escalated},
              {"error", d.error}};
}

Json to_json(const SweepSummary& s) {
  return Json{{"beta_monotone", s.beta_monotone},
              {"lambda0_empirical", num(s.lambda0_empirical)},
              {"lambda_vol_max_over_last", num(s.lambda_vol_max_over_last)},
              {"gb_max", num(s.gb_max)},
              {"converged_rows", s.converged_rows}};
}

Json to_json(const BetaPrimeEstimate& b) {
  Json samples = Json::array();
  for (const auto& s : b.samples) samples.push_back({{"lambda", num(s.lambda)}, {"beta_prime", num(s.derivative)}});
  return Json{{"samples", samples}, {"c0", num(b.c0)}};
}

Json to_json(const ComparisonFn& c) {
  return Json{{"lambda", num(c.lambda)},
              {"center", point_json(c.center)},
              {"L", num(c.L)},
              {"inner_radius", num(c.inner_radius)},
              {"outer_radius", num(c.outer_radius)},
              {"energy", num(c.energy)},
              {"energy_grid", num(c.energy_grid)},
              {"energy_analytic", num(c.energy_analytic)},
              {"energy_rel_error", num(c.energy / c.energy_analytic - 1)},
              {"refined", c.refined},
              {"chart_n", c.chart_n},
              {"chart_side", num(c.chart_side)},
              {"support_min_f_lambda", num(c.support_min_f)}};
}

Json to_json(const AlphaResult& a) {
  return Json{{"alpha", num(a.alpha)},
              {"constraint_residual", num(a.constraint_residual)},
              {"chart_quadrature", a.chart_quadrature}};
}

Json to_json(const EpsilonStar& e) { return Json{{"value", num(e.value)}, {"in_window", e.in_window}}; }

Json to_json(const MonotonicityProbe& m) {
  Json samples = Json::array();
  for (const auto& s : m.h_samples) {
    samples.push_back(
        {{"eps", num(s.eps)}, {"h", num(s.h)}, {"h_prime", num(s.h_prime)}, {"h_prime_fd", num(s.h_prime_fd)}});
  }
  return Json{{"lambda_star", num(m.lambda_star)},
              {"eps_star", num(m.eps_star)},
              {"ell", num(m.ell)},
              {"min_h_prime", num(m.min_h_prime)},
              {"max_fd_rel_error", num(m.max_fd_rel_error)},
              {"max_identity_error", num(m.max_identity_error)},
              {"samples", samples}};
}

Json to_json(const BubbleReport& b, bool with_profile) {
  Json j{{"lambda", num(b.lambda)},
         {"p_n", point_json(b.p_n)},
         {"dist_to_f0max", num(b.dist_to_f0max)},
         {"u_peak", num(b.u_peak)},
         {"f_lambda_at_peak", num(b.f_lambda_at_peak)},
         {"regime", b.regime},
         {"r_n", num(b.r_n)},
         {"scale_ratio", num(b.scale_ratio)},
         {"c_fit", num(b.c_fit)},
         {"sup_dev", num(b.sup_dev)},
         {"local_mass", num(b.local_mass)},
         {"mass_radius", num(b.mass_radius)},
         {"rescaled_residual", num(b.rescaled_residual)}};
  if (with_profile) {
    Json prof = Json::array();
    for (const auto& s : b.profile) prof.push_back(Json::array({s.ray, s.radius, num(s.w_n), num(s.w_model)}));
    j["profile_columns"] = Json::array({"ray", "radius", "w_n", "w_model"});
    j["profile"] = prof;
  }
  return j;
}

Json to_json(const DichotomyResult& d) {
  return Json{{"verdict", to_string(d.verdict)}, {"slopes", d.slopes}, {"last_slope", num(d.last_slope)}};
}

Json to_json(const LambdaMaxSummary& s) {
  Json rows = Json::array();
  for (const auto& r : s.rows) {
    rows.push_back({{"fraction", num(r.fraction)},
                    {"beta", num(r.beta)},
                    {"mu", num(r.mu)},
                    {"w_sup", num(r.w_sup)},
                    {"u_max", num(r.u_max)},
                    {"slice_energy", num(r.slice_energy)},
                    {"theta_ratio", num(r.theta_ratio)}});
  }
  return Json{{"s0", num(s.s0)},
              {"rows", rows},
              {"beta_decreasing", s.beta_decreasing},
              {"mu_decreasing", s.mu_decreasing},
              {"w_sup_decreasing", s.w_sup_decreasing},
              {"u_max_decreasing", s.u_max_decreasing},
              {"theta_ratio_decreasing", s.theta_ratio_decreasing},
              {"slice_bound_holds", s.slice_bound_holds}};
}

Json to_json(const Problem& p) {
  Json maxima = Json::array();
  for (const auto& m : p.maxima()) {
    maxima.push_back({{"p", point_json(m.p)},
                      {"value", num(m.value)},
                      {"hessian", Json::array({m.hessian(0, 0), m.hessian(0, 1), m.hessian(1, 1)})}});
  }
  return Json{{"family", describe(p.family())},
              {"n", p.grid().n()},
              {"f0_bar", num(p.f0_bar())},
              {"lambda_max", num(p.lambda_max())},
              {"f0_min", num(p.f0_min())},
              {"L", num(p.L())},
              {"maxima", maxima}};
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw Error(ErrorCode::IoError, "failed writing " + path.string());
}

void write_json(const std::filesystem::path& path, const Json& j) { write_text(path, j.dump(2) + "\n"); }

void write_profile_tables(const std::filesystem::path& dir, const BubbleReport& b) {
  std::map<int, std::string> rays;
  std::map<double, double> model;
  for (const auto& s : b.profile) {
    rays[s.ray] += format_number(s.radius) + " " + format_number(s.w_n) + "\n";
    model.emplace(s.radius, s.w_model);
  }
  for (const auto& [ray, text] : rays) {
    write_text(dir / ("profile_ray" + std::to_string(ray) + ".dat"), "# radius w_n\n" + text);
  }
  std::string m = "# radius w_model\n";
  for (const auto& [r, v] : model) m += format_number(r) + " " + format_number(v) + "\n";
  write_text(dir / "profile_model.dat", m);
}

}  // namespace curvtorus

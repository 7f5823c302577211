#include "curvtorus/commands.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <sstream>

#include "curvtorus/field_io.hpp"
#include "curvtorus/report.hpp"

namespace curvtorus {

namespace {

// Raised for problems detected before any compute starts.
struct ConfigFailure : Error {
  using Error::Error;
};

Problem load_problem(const RunConfig& cfg) {
  try {
    return build_problem(cfg.family(), Grid(cfg.n()), cfg.problem_options());
  } catch (const Error& e) {
    throw ConfigFailure(e.code(), e.what());
  }
}

double require_lambda(const RunConfig& cfg, const Problem& p) {
  const auto lam = cfg.lambda();
  if (!lam) throw ConfigFailure(ErrorCode::ConfigError, "lambda is required (--lambda)");
  const bool inside = p.mode() == ValidationMode::unchecked ? admissible_lambda(p, *lam)
                                                            : (*lam > 0 && *lam < p.lambda_max());
  if (!inside) {
    std::ostringstream os;
    os.precision(10);
    os << "lambda = " << *lam << " lies outside the solvable interval (0, -mean f0) = (0, " << p.lambda_max() << ")";
    throw ConfigFailure(ErrorCode::ConfigError, os.str());
  }
  return *lam;
}

std::vector<double> require_schedule(const std::string& spec, const Problem& p) {
  std::vector<double> s;
  try {
    s = parse_schedule(spec, p);
  } catch (const Error& e) {
    throw ConfigFailure(e.code(), e.what());
  }
  for (double l : s) {
    if (!(l > 0 && l < p.lambda_max())) {
      std::ostringstream os;
      os << "schedule value " << l << " lies outside (0, " << p.lambda_max() << ")";
      throw ConfigFailure(ErrorCode::ConfigError, os.str());
    }
  }
  return s;
}

const char* yes_no(bool b) { return b ? "yes" : "no"; }

Json beta_bound_check(const std::vector<ContinuationRecord>& records, double sigma) {
  Json rows = Json::array();
  bool holds = true;
  const double factor = 2.0 * std::numbers::pi * (sigma + 2) * (sigma + 2);
  for (const auto& r : records) {
    if (!r.converged || r.lambda > 0.2) continue;
    const double bound = factor * std::log(1.0 / r.lambda);
    holds = holds && r.beta <= bound;
    rows.push_back({{"lambda", r.lambda}, {"beta", r.beta}, {"bound", bound}});
  }
  return Json{{"holds", holds}, {"rows", rows}};
}

std::string two_column(const std::vector<ContinuationRecord>& records, double ContinuationRecord::*field,
                       const std::string& label) {
  std::string out = "# lambda " + label + "\n";
  for (const auto& r : records) {
    if (r.converged) out += format_number(r.lambda) + " " + format_number(r.*field) + "\n";
  }
  return out;
}

std::vector<ContinuationRecord> records_of(const std::vector<SweepRow>& rows) {
  std::vector<ContinuationRecord> out;
  for (const auto& r : rows) out.push_back(r.record);
  return out;
}

Json comparison_rows(const Problem& p, const std::vector<SweepRow>& rows, const RunConfig& cfg) {
  Json out = Json::array();
  std::vector<AlphaSample> samples;
  for (const auto& row : rows) {
    if (!row.record.converged) continue;
    const double lam = row.record.lambda;
    Json j{{"lambda", lam}};
    try {
      const Problem local = p.on_grid(Grid(row.diag.n));
      const ComparisonFn phi = build_phi(local, lam, cfg.phi_options());
      const AlphaResult a = solve_alpha(local, lam, phi);
      samples.push_back({lam, a.alpha});
      j["energy_phi"] = phi.energy;
      j["energy_analytic"] = phi.energy_analytic;
      j["alpha"] = a.alpha;
      j["upper_bound"] = a.alpha * a.alpha * phi.energy;
      j["beta_below_bound"] = row.record.beta <= a.alpha * a.alpha * phi.energy;
    } catch (const Error& e) {
      j["error"] = e.what();
    }
    out.push_back(j);
  }
  return Json{{"rows", out},
              {"lambda_sigma_empirical", empirical_lambda_sigma(samples, cfg.sigma())},
              {"lambda_sigma_closed_form", closed_form_lambda_sigma(p, cfg.sigma())}};
}

const SweepRow* smallest_converged(const std::vector<SweepRow>& rows) {
  const SweepRow* best = nullptr;
  for (const auto& r : rows) {
    if (r.record.converged && r.u && (!best || r.record.lambda < best->record.lambda)) best = &r;
  }
  return best;
}

Json bubble_for_row(const Problem& p, const SweepRow& row, const BubbleOptions& opts, BubbleReport* keep) {
  const Problem local = p.on_grid(row.u->grid());
  const auto peaks = locate_peaks(*row.u, local);
  Json reports = Json::array();
  for (std::size_t k = 0; k < peaks.size(); ++k) {
    try {
      const BubbleReport b = classify_and_rescale(local, *row.u, row.record.lambda, peaks[k], opts);
      if (k == 0 && keep) *keep = b;
      reports.push_back(to_json(b, k == 0));
    } catch (const Error& e) {
      reports.push_back({{"p", Json::array({peaks[k].p.x(), peaks[k].p.y()})}, {"error", e.what()}});
    }
  }
  return Json{{"lambda", row.record.lambda}, {"peaks", peaks.size()}, {"reports", reports}};
}

}  // namespace

int cmd_solve(const RunConfig& cfg, std::ostream& out) {
  cfg.validate();
  const Problem p = load_problem(cfg);
  const double lam = require_lambda(cfg, p);
  SolverConfig solver = cfg.solver();
  if (const auto ws = cfg.warm_start()) {
    try {
      solver.warm_start = load_field(*ws);
    } catch (const Error& e) {
      throw ConfigFailure(ErrorCode::ConfigError, std::string("warm start: ") + e.what());
    }
  }
  const MinimizeResult r = minimize(p, lam, solver);
  const auto dir = cfg.out_dir();
  Json j = metadata(cfg, "solve");
  j["problem"] = to_json(p);
  j["lambda"] = lam;
  j["result"] = to_json(r);
  write_json(dir / "result.json", j);
  std::filesystem::create_directories(dir);
  save_field(dir / "w.field", r.w);
  save_field(dir / "u.field", r.u);
  out << "lambda " << format_number(lam) << " beta " << format_number(r.beta) << " mu " << format_number(r.mu)
      << " iters " << r.iters << " " << to_string(r.termination) << "\n";
  return r.converged ? 0 : 2;
}

int cmd_sweep(const RunConfig& cfg, std::ostream& out) {
  cfg.validate();
  const Problem p = load_problem(cfg);
  const auto schedule = require_schedule(cfg.schedule(), p);
  const auto rows = sweep(p, schedule, cfg.sweep_options());
  const auto records = records_of(rows);
  const auto dir = cfg.out_dir();

  Json j = metadata(cfg, "sweep");
  j["problem"] = to_json(p);
  j["schedule"] = schedule;
  Json recs = Json::array(), diags = Json::array();
  for (const auto& r : rows) {
    recs.push_back(to_json(r.record));
    diags.push_back(to_json(r.diag));
  }
  j["records"] = recs;
  j["diagnostics"] = diags;
  const SweepSummary summary = summarize(records);
  j["summary"] = to_json(summary);
  j["beta_bound"] = beta_bound_check(records, cfg.sigma());
  if (summary.converged_rows >= 3) j["beta_prime"] = to_json(estimate_beta_prime(records));
  if (cfg.flag("compare")) j["comparison"] = comparison_rows(p, rows, cfg);
  if (cfg.flag("blowup")) {
    if (const SweepRow* row = smallest_converged(rows)) j["blowup"] = bubble_for_row(p, *row, cfg.bubble_options(), nullptr);
  }
  if (cfg.flag("lmax")) {
    try {
      j["lambda_max"] = to_json(lambda_max_report(p, records));
    } catch (const Error& e) {
      j["lambda_max"] = Json{{"error", e.what()}};
    }
  }
  write_json(dir / "sweep.json", j);
  write_text(dir / "sweep.csv", records_csv(records));
  write_text(dir / "beta.dat", two_column(records, &ContinuationRecord::beta, "beta"));
  write_text(dir / "lambda_vol.dat", two_column(records, &ContinuationRecord::lambda_times_vol, "lambda_times_vol"));

  out << "rows " << rows.size() << " converged " << summary.converged_rows << "\n";
  out << "beta monotone decreasing in lambda: " << yes_no(summary.beta_monotone) << "\n";
  out << "empirical monotone range: lambda <= " << format_number(summary.lambda0_empirical) << "\n";
  out << "max(lambda*vol)/last: " << format_number(summary.lambda_vol_max_over_last) << "\n";
  out << "max Gauss-Bonnet residual: " << format_number(summary.gb_max) << "\n";
  return summary.converged_rows > 0 ? 0 : 2;
}

int cmd_blowup(const RunConfig& cfg, std::ostream& out) {
  cfg.validate();
  const Problem p = load_problem(cfg);
  const auto schedule = require_schedule(cfg.schedule(), p);
  const auto rows = sweep(p, schedule, cfg.sweep_options());
  const auto dir = cfg.out_dir();
  const BubbleOptions bopts = cfg.bubble_options();

  Json j = metadata(cfg, "blowup");
  j["problem"] = to_json(p);
  Json per_row = Json::array();
  std::vector<DichotomySample> samples;
  for (const auto& row : rows) {
    if (!row.record.converged || !row.u) continue;
    const Problem local = p.on_grid(row.u->grid());
    samples.push_back({row.record.lambda, omega_min(*row.u, local)});
    if (row.record.u_max >= bopts.peak_min) per_row.push_back(bubble_for_row(p, row, bopts, nullptr));
  }
  j["bubbles"] = per_row;
  if (samples.size() >= 3) {
    const auto d = dichotomy_detect(samples);
    j["dichotomy"] = to_json(d);
    out << "dichotomy away from the maxima: " << to_string(d.verdict) << " (last slope " << format_number(d.last_slope)
        << ")\n";
  }
  const SweepRow* last = smallest_converged(rows);
  if (!last) {
    write_json(dir / "blowup.json", j);
    out << "no converged rows\n";
    return 2;
  }
  BubbleReport keep{};
  keep.regime = 0;
  j["smallest"] = bubble_for_row(p, *last, bopts, &keep);
  write_json(dir / "blowup.json", j);
  if (keep.regime != 0) {
    write_profile_tables(dir, keep);
    out << "lambda " << format_number(keep.lambda) << " regime " << keep.regime << " r_n " << format_number(keep.r_n)
        << " sup_dev " << format_number(keep.sup_dev) << " local_mass " << format_number(keep.local_mass) << "\n";
  } else {
    out << "lambda " << format_number(last->record.lambda) << ": no bubble could be analyzed\n";
  }
  return 0;
}

int cmd_compare(const RunConfig& cfg, std::ostream& out) {
  cfg.validate();
  const Problem p = load_problem(cfg);
  const double lam = require_lambda(cfg, p);
  const auto dir = cfg.out_dir();
  Json j = metadata(cfg, "compare");
  j["problem"] = to_json(p);
  j["lambda"] = lam;

  const ComparisonFn phi = build_phi(p, lam, cfg.phi_options());
  const AlphaResult a = solve_alpha(p, lam, phi);
  j["phi"] = to_json(phi);
  j["alpha"] = to_json(a);
  j["lambda_sigma_closed_form"] = closed_form_lambda_sigma(p, cfg.sigma());
  out << "E(phi) " << format_number(phi.energy) << " analytic 2 pi log(1/lambda) " << format_number(phi.energy_analytic)
      << "\nalpha " << format_number(a.alpha) << "\n";

  const SolverConfig solver = cfg.solver();
  const MinimizeResult star = solve_by_continuation(p, lam, solver);
  j["beta_star"] = star.beta;
  j["upper_bound"] = a.alpha * a.alpha * phi.energy;
  j["beta_below_bound"] = star.beta <= a.alpha * a.alpha * phi.energy;
  const EpsilonStar eps = epsilon_star(star.u, phi);
  j["eps_star"] = to_json(eps);
  if (eps.value > 0) {
    const MonotonicityProbe probe = probe_h(p, lam, star.u, phi, eps.value, cfg.probe_samples());
    j["probe"] = to_json(probe);
    // Re-minimize halfway along the curve h.
    Field v = star.u;
    v.values() -= 0.5 * eps.value * phi.field.values();
    const double lam_half = I_map(p, v);
    SolverConfig warm = solver;
    v.values() -= mean(v);
    warm.warm_start = v;
    try {
      const MinimizeResult half = minimize(p, lam_half, warm);
      j["half_step"] = Json{{"lambda", lam_half},
                            {"beta", half.beta},
                            {"energy_along_curve", dirichlet_energy(v)},
                            {"beta_decreased", half.beta < star.beta}};
    } catch (const Error& e) {
      j["half_step"] = Json{{"lambda", lam_half}, {"error", e.what()}};
    }
    out << "eps* " << format_number(eps.value) << " min h' " << format_number(probe.min_h_prime) << " ell "
        << format_number(probe.ell) << "\n";
  } else {
    out << "eps* " << format_number(eps.value) << " is not positive; probe skipped\n";
  }
  write_json(dir / "compare.json", j);
  return star.converged ? 0 : 2;
}

int cmd_lmax(const RunConfig& cfg, std::ostream& out) {
  cfg.validate();
  const Problem p = load_problem(cfg);
  auto points = require_schedule("lmax:" + cfg.lmax_points(), p);
  std::sort(points.begin(), points.end());
  const auto rows = sweep(p, points, cfg.sweep_options());
  const auto records = records_of(rows);
  const auto dir = cfg.out_dir();
  Json j = metadata(cfg, "lmax");
  j["problem"] = to_json(p);
  Json recs = Json::array();
  for (const auto& r : records) recs.push_back(to_json(r));
  j["records"] = recs;
  const LambdaMaxSummary s = lambda_max_report(p, records);
  j["summary"] = to_json(s);
  write_json(dir / "lmax.json", j);
  write_text(dir / "lmax.csv", records_csv(records));
  out << "s0 " << format_number(s.s0) << "\n";
  out << "beta decreasing: " << yes_no(s.beta_decreasing) << "\n";
  out << "mu decreasing: " << yes_no(s.mu_decreasing) << "\n";
  out << "w_sup decreasing: " << yes_no(s.w_sup_decreasing) << "\n";
  out << "max u decreasing: " << yes_no(s.u_max_decreasing) << "\n";
  out << "beta below slice energy: " << yes_no(s.slice_bound_holds) << "\n";
  return 0;
}

int run_command(const std::string& name, const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    if (name == "solve") return cmd_solve(cfg, out);
    if (name == "sweep") return cmd_sweep(cfg, out);
    if (name == "blowup") return cmd_blowup(cfg, out);
    if (name == "compare") return cmd_compare(cfg, out);
    if (name == "lmax") return cmd_lmax(cfg, out);
    err << "unknown command '" << name << "'\n";
    return 1;
  } catch (const ConfigFailure& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return e.code() == ErrorCode::ConfigError ? 1 : 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace curvtorus

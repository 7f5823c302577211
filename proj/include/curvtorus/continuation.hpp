#pragma once

// Warm-started lambda sweeps, per-row diagnostics, and the upper-end analysis
// (first-order slice through u = 0 and the degeneration trends).

#include <optional>
#include <string>
#include <vector>

#include "curvtorus/minimizer.hpp"

namespace curvtorus {

struct ContinuationRecord {
  double lambda;
  double beta;
  double mu;
  double vol;  // int e^{2u}
  double lambda_times_vol;
  double total_curvature;  // int (|f0| + lambda) e^{2u}
  double gb_residual;      // |int f_lambda e^{2u}|
  double u_max;
  double u_min;
  double w_sup;
  std::optional<Point> blowup_point;
  bool converged;
};

struct RecordDiagnostics {
  int n = 0;  // grid actually used
  int iters = 0;
  double mu_b = 0;
  double multiplier_gap = 0;
  double pde_residual = 0;
  double pde_residual_rel = 0;
  double positive_mass = 0;  // int f_lambda^+ e^{2u}
  double negative_mass = 0;  // int f_lambda^- e^{2u}
  std::string termination;
  bool escalated = false;
  std::string error;  // non-empty when the solve threw
};

struct SweepRow {
  ContinuationRecord record;
  RecordDiagnostics diag;
  std::optional<Field> w;
  std::optional<Field> u;
};

struct SweepOptions {
  SolverConfig solver;
  bool escalate = true;
  int max_n = 512;
  double gap_tol = 1e-5;
  double peak_min = 2.0;  // u_max above this marks a concentration point
  bool keep_fields = true;
};

// Solves along the schedule in the given order, warm-starting each row from
// the previous one. A row that misses its tolerances is rerun at twice the
// resolution (up to max_n) and the sweep stays on the finer grid. Failures are
// recorded and the sweep continues.
std::vector<SweepRow> sweep(const Problem& p, const std::vector<double>& schedule, const SweepOptions& opts = {});

ContinuationRecord make_record(const Problem& p, double lambda, const MinimizeResult& r, double peak_min = 2.0);

// Schedules: "geo:lo:hi:ratio" (descending from hi by ratio, ending at lo),
// "list:a,b,..." (as given), "lmax:f1,f2,..." (fractions of lambda_max),
// "gap:d_hi:d_lo:ratio" (lambda_max * (1 - d) for d shrinking geometrically).
std::vector<double> parse_schedule(const std::string& spec, const Problem& p);

struct BetaPrime {
  double lambda;
  double derivative;
};
struct BetaPrimeEstimate {
  std::vector<BetaPrime> samples;
  double c0;  // max lambda |beta'| over samples with lambda <= small_max
};
// Three-point differences in log(lambda) over converged records.
BetaPrimeEstimate estimate_beta_prime(std::vector<ContinuationRecord> records, double small_max = 0.2);

struct SweepSummary {
  bool beta_monotone;            // strictly decreasing in lambda over converged rows
  double lambda0_empirical;      // largest lambda below which beta is monotone
  double lambda_vol_max_over_last;
  double gb_max;
  int converged_rows;
};
SweepSummary summarize(const std::vector<ContinuationRecord>& records);

struct SliceResult {
  double s0;
  Field v_lambda;  // projected slice field
  double theta_norm;
  double energy_upper;
};
SliceResult slice_construct(const Problem& p, double lambda);

struct LambdaMaxRow {
  double fraction;
  double beta;
  double mu;
  double w_sup;
  double u_max;
  double slice_energy;
  double theta_ratio;  // theta_norm / |lambda - lambda_max|
};
struct LambdaMaxSummary {
  std::vector<LambdaMaxRow> rows;
  bool beta_decreasing;
  bool mu_decreasing;
  bool w_sup_decreasing;
  bool u_max_decreasing;
  bool theta_ratio_decreasing;
  bool slice_bound_holds;  // beta <= slice energy at each row
  double s0;
};
// Records must have lambda / lambda_max >= 0.9; at least three.
LambdaMaxSummary lambda_max_report(const Problem& p, std::vector<ContinuationRecord> records);

// Cold solve at small lambda through a warm-start chain from 0.5 lambda_max
// downward by the given ratio.
MinimizeResult solve_by_continuation(const Problem& p, double lambda, const SolverConfig& cfg = {},
                                     double ratio = 0.7);

}  // namespace curvtorus

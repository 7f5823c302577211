#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "curvtorus/commands.hpp"

namespace {

struct Overrides {
  std::string config_file;
  std::vector<std::string> sets;
  std::string family, validation, out, schedule, points, warm_start, lambda;
  int n = 0;
};

void add_common(CLI::App* sub, Overrides& o) {
  sub->add_option("--config", o.config_file, "key = value config file");
  sub->add_option("--set", o.sets, "override a config key (key=value), repeatable");
  sub->add_option("--family", o.family, "cosine:a | multibump:a:x,y:... | tabulated:file");
  sub->add_option("--validation", o.validation, "strict | allow_degenerate | unchecked");
  sub->add_option("--n", o.n, "grid points per axis (power of two >= 16)");
  sub->add_option("--out", o.out, "output directory");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral solver and lambda-continuation for prescribed curvature on the flat torus"};
  app.require_subcommand(1);
  Overrides o;

  auto* solve = app.add_subcommand("solve", "minimize at one lambda, write result.json and field snapshots");
  add_common(solve, o);
  solve->add_option("--lambda", o.lambda, "parameter in (0, -mean f0)");
  solve->add_option("--warm-start", o.warm_start, "TORUS-FIELD v1 snapshot to start from");

  auto* sweep = app.add_subcommand("sweep", "warm-started lambda sweep, CSV and JSON records");
  add_common(sweep, o);
  sweep->add_option("--schedule", o.schedule, "geo:lo:hi:ratio | list:a,b,.. | lmax:f1,.. | gap:d_hi:d_lo:ratio");

  auto* blowup = app.add_subcommand("blowup", "downward sweep with bubble analysis");
  add_common(blowup, o);
  blowup->add_option("--schedule", o.schedule, "lambda schedule");

  auto* compare = app.add_subcommand("compare", "comparison function, alpha, eps* and the h probe");
  add_common(compare, o);
  compare->add_option("--lambda", o.lambda, "parameter in (0, 1)");

  auto* lmax = app.add_subcommand("lmax", "degeneration trends near the upper end of the interval");
  add_common(lmax, o);
  lmax->add_option("--points", o.points, "fractions of lambda_max, e.g. 0.9,0.99,0.999");

  CLI11_PARSE(app, argc, argv);
  const std::string command = app.get_subcommands().front()->get_name();

  curvtorus::RunConfig cfg;
  try {
    if (!o.config_file.empty()) cfg = curvtorus::RunConfig::from_file(o.config_file);
    if (!o.family.empty()) cfg.set("family", o.family);
    if (!o.validation.empty()) cfg.set("validation", o.validation);
    if (o.n != 0) cfg.set("n", std::to_string(o.n));
    if (!o.out.empty()) cfg.set("out", o.out);
    if (!o.schedule.empty()) cfg.set("schedule", o.schedule);
    if (!o.points.empty()) cfg.set("lmax_points", o.points);
    if (!o.warm_start.empty()) cfg.set("warm_start", o.warm_start);
    if (!o.lambda.empty()) cfg.set("lambda", o.lambda);
    for (const auto& kv : o.sets) cfg.set_assignment(kv);
  } catch (const curvtorus::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return curvtorus::run_command(command, cfg, std::cout, std::cerr);
}

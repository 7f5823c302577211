#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "curvtorus/commands.hpp"
#include "curvtorus/config.hpp"
#include "curvtorus/field_io.hpp"
#include "curvtorus/report.hpp"

using namespace curvtorus;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("curvtorus_cli_" + name);
  fs::remove_all(d);
  return d;
}

struct Run {
  int code;
  std::string out, err;
};

Run run(const std::string& cmd, const RunConfig& cfg) {
  std::ostringstream out, err;
  const int code = run_command(cmd, cfg, out, err);
  return {code, out.str(), err.str()};
}

}  // namespace

TEST_SUITE("cli_io") {
  TEST_CASE("config text and overrides") {
    const RunConfig cfg = RunConfig::from_text("# comment\n n = 64 \nfamily=cosine:0.25  # trailing\n\nlambda=0.1\n");
    CHECK(cfg.n() == 64);
    CHECK(cfg.lambda() == 0.1);
    const F0Family fam = cfg.family();
    REQUIRE(std::holds_alternative<CosineFamily>(fam));
    CHECK(std::get<CosineFamily>(fam).a == 0.25);
    CHECK_FALSE(RunConfig().lambda().has_value());

    RunConfig c2;
    c2.set_assignment("family = multibump:0.5:0,0:0.5,0.5");
    const auto mb = std::get<MultiBumpFamily>(c2.family());
    CHECK(mb.a == 0.5);
    REQUIRE(mb.centers.size() == 2);
    CHECK(mb.centers[1].x() == 0.5);

    CHECK_THROWS_AS(RunConfig::from_text("colour = red\n"), Error);
    CHECK_THROWS_AS(RunConfig::from_text("n 64\n"), Error);
    RunConfig bad;
    bad.set("n", "48");
    CHECK_THROWS_AS(bad.validate(), Error);
    bad = RunConfig();
    bad.set("grad_tol", "-1");
    CHECK_THROWS_AS(bad.validate(), Error);
    bad = RunConfig();
    bad.set("family", "sine:1");
    CHECK_THROWS_AS(bad.validate(), Error);
    CHECK_NOTHROW(RunConfig().validate());
  }

  TEST_CASE("config file") {
    const fs::path d = scratch("cfgfile");
    fs::create_directories(d);
    std::ofstream(d / "run.cfg") << "n = 32\nschedule = list:0.3,0.2\n";
    const RunConfig cfg = RunConfig::from_file(d / "run.cfg");
    CHECK(cfg.n() == 32);
    CHECK(cfg.schedule() == "list:0.3,0.2");
    CHECK_THROWS_AS(RunConfig::from_file(d / "missing.cfg"), Error);
    fs::remove_all(d);
  }

  TEST_CASE("canonical form and hash") {
    RunConfig a, b;
    CHECK(a.hash() == b.hash());
    CHECK(a.hash_hex().size() == 16);
    b.set("n", "64");
    CHECK(a.hash() != b.hash());
    b.set("n", "128");
    CHECK(a.hash() == b.hash());
    const std::string canon = a.canonical();
    CHECK(canon.find("c_tol=1e-10\n") != std::string::npos);
    CHECK(canon.find("n=128\n") != std::string::npos);
    // FNV-1a 64 of the canonical text, recomputed here
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : canon) h = (h ^ c) * 1099511628211ull;
    CHECK(h == a.hash());
  }

  TEST_CASE("records csv") {
    ContinuationRecord r{};
    r.lambda = 0.5;
    r.beta = 1.25;
    r.converged = true;
    ContinuationRecord q = r;
    q.blowup_point = Point(0.25, 0.0);
    q.converged = false;
    const std::string csv = records_csv({r, q});
    std::istringstream in(csv);
    std::string header, row1, row2;
    std::getline(in, header);
    std::getline(in, row1);
    std::getline(in, row2);
    CHECK(header ==
          "lambda,beta,mu,vol,lambda_times_vol,total_curvature,gb_residual,u_max,u_min,w_sup,blowup_point,converged");
    CHECK(std::count(row1.begin(), row1.end(), ',') == 11);
    CHECK(row1.rfind("0.5,1.25,", 0) == 0);
    CHECK(row1.find(",,true") != std::string::npos);
    CHECK(row2.find(",0.25;0,false") != std::string::npos);
  }

  TEST_CASE("number formatting round-trips") {
    for (double v : {0.1, 1.0 / 3.0, 1e-300, -2.5e17}) CHECK(std::stod(format_number(v)) == v);
  }

  TEST_CASE("metadata") {
    RunConfig cfg;
    const Json m = metadata(cfg, "solve");
    CHECK(m["schema"] == "v1");
    CHECK(m["version"] == "1.0.0");
    CHECK(m["command"] == "solve");
    CHECK(m["config_hash"] == cfg.hash_hex());
    CHECK(m["config"]["n"] == "128");
  }

  TEST_CASE("solve rejects lambda outside the interval") {
    RunConfig cfg;
    cfg.set("n", "32");
    cfg.set("lambda", "1.5");
    cfg.set("out", scratch("reject").string());
    const Run r = run("solve", cfg);
    CHECK(r.code == 1);
    CHECK(r.err.find("outside the solvable interval") != std::string::npos);
    cfg.set("lambda", "");
    CHECK(run("solve", cfg).code == 1);
    cfg.set("lambda", "0.5");
    cfg.set("family", "cosine:zero");
    CHECK(run("solve", cfg).code == 1);
    CHECK(run("teleport", RunConfig()).code == 1);
  }

  TEST_CASE("solve writes reproducible outputs and resumes") {
    const fs::path d = scratch("solve");
    RunConfig cfg;
    cfg.set("n", "32");
    cfg.set("lambda", "0.5");
    cfg.set("out", d.string());
    REQUIRE(run("solve", cfg).code == 0);
    const std::string first = slurp(d / "result.json");
    const Json j = Json::parse(first);
    CHECK(j["schema"] == "v1");
    CHECK(j["config_hash"] == cfg.hash_hex());
    CHECK(j["result"]["mu"].get<double>() > 0);
    CHECK(j["result"]["converged"] == true);
    const Field w = load_field(d / "w.field");
    CHECK(w.grid().n() == 32);
    CHECK(load_field(d / "u.field").grid().n() == 32);

    REQUIRE(run("solve", cfg).code == 0);
    CHECK(slurp(d / "result.json") == first);

    RunConfig resumed = cfg;
    resumed.set("warm_start", (d / "w.field").string());
    resumed.set("out", (d / "resumed").string());
    REQUIRE(run("solve", resumed).code == 0);
    const Json k = Json::parse(slurp(d / "resumed" / "result.json"));
    CHECK(k["result"]["iters"].get<int>() <= 2);

    resumed.set("warm_start", (d / "nothing.field").string());
    CHECK(run("solve", resumed).code == 1);
    fs::remove_all(d);
  }

  TEST_CASE("sweep and lmax outputs") {
    const fs::path d = scratch("sweep");
    RunConfig cfg;
    cfg.set("n", "32");
    cfg.set("schedule", "list:0.4,0.3,0.2");
    cfg.set("out", d.string());
    const Run r = run("sweep", cfg);
    REQUIRE(r.code == 0);
    CHECK(r.out.find("beta monotone decreasing in lambda: yes") != std::string::npos);
    const std::string csv = slurp(d / "sweep.csv");
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
    const Json j = Json::parse(slurp(d / "sweep.json"));
    CHECK(j["config_hash"] == cfg.hash_hex());
    CHECK(j["records"].size() == 3);
    CHECK(j["summary"]["beta_monotone"] == true);
    CHECK(fs::exists(d / "beta.dat"));
    CHECK(fs::exists(d / "lambda_vol.dat"));

    cfg.set("out", (d / "lmax").string());
    const Run l = run("lmax", cfg);
    REQUIRE(l.code == 0);
    CHECK(l.out.find("beta decreasing: yes") != std::string::npos);
    CHECK(Json::parse(slurp(d / "lmax" / "lmax.json"))["version"] == "1.0.0");

    cfg.set("schedule", "list:0.3,0.4,0.2");
    CHECK(run("sweep", cfg).code == 1);
    fs::remove_all(d);
  }

  TEST_CASE("compare output") {
    const fs::path d = scratch("compare");
    RunConfig cfg;
    cfg.set("n", "64");
    cfg.set("lambda", "0.1");
    cfg.set("probe_samples", "4");
    cfg.set("out", d.string());
    const Run r = run("compare", cfg);
    REQUIRE(r.code == 0);
    const Json j = Json::parse(slurp(d / "compare.json"));
    CHECK(j["phi"]["energy_analytic"].get<double>() == doctest::Approx(14.4677).epsilon(1e-5));
    CHECK(j["alpha"]["alpha"].get<double>() > 0);
    CHECK(j["config_hash"] == cfg.hash_hex());
    fs::remove_all(d);
  }

  TEST_CASE("blowup output") {
    const fs::path d = scratch("blowup");
    RunConfig cfg;
    cfg.set("n", "64");
    cfg.set("schedule", "geo:0.05:0.5:0.6");
    cfg.set("out", d.string());
    const Run r = run("blowup", cfg);
    REQUIRE(r.code == 0);
    const Json j = Json::parse(slurp(d / "blowup.json"));
    CHECK(j.contains("dichotomy"));
    CHECK(j["config_hash"] == cfg.hash_hex());
    CHECK(fs::exists(d / "profile_model.dat"));
    CHECK(fs::exists(d / "profile_ray0.dat"));
    fs::remove_all(d);
  }
}

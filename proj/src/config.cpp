#include "curvtorus/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "curvtorus/field_io.hpp"

namespace curvtorus {

namespace {

const std::map<std::string, std::string>& defaults() {
  static const std::map<std::string, std::string> d = {
      {"family", "cosine:0.5"},
      {"validation", "strict"},
      {"n", "128"},
      {"lambda", ""},
      {"max_iters", "2000"},
      {"step0", "0.5"},
      {"grad_tol", "1e-8"},
      {"c_tol", "1e-10"},
      {"res_tol", "1e-5"},
      {"preconditioner", "sobolev"},
      {"dealias", "none"},
      {"schedule", "geo:0.02:0.5:0.7"},
      {"lmax_points", "0.9,0.99,0.999"},
      {"escalate", "true"},
      {"max_n", "512"},
      {"gap_tol", "1e-5"},
      {"peak_min", "2.0"},
      {"sigma", "1.0"},
      {"probe_samples", "10"},
      {"auto_refine", "true"},
      {"max_chart_n", "2048"},
      {"regime_ratio", "0.2"},
      {"profile_R", "4.0"},
      {"dev_R", "2.0"},
      {"rays", "8"},
      {"radii", "64"},
      {"mass_factor", "10.0"},
      {"compare", "false"},
      {"blowup", "false"},
      {"lmax", "false"},
      {"out", "out"},
      {"warm_start", ""},
      {"seed", "0"},
  };
  return d;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size() || !std::isfinite(d)) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw Error(ErrorCode::ConfigError, key + ": expected a number, got '" + v + "'");
  }
}

long long to_int(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const long long i = std::stoll(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return i;
  } catch (const std::exception&) {
    throw Error(ErrorCode::ConfigError, key + ": expected an integer, got '" + v + "'");
  }
}

double positive(const std::string& key, double v) {
  if (!(v > 0)) throw Error(ErrorCode::ConfigError, key + " must be > 0");
  return v;
}

}  // namespace

RunConfig::RunConfig() : values_(defaults()) {}

RunConfig RunConfig::from_text(const std::string& text) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::ConfigError, "line " + std::to_string(lineno) + ": expected key = value");
    }
    cfg.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return cfg;
}

RunConfig RunConfig::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ConfigError, "cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return from_text(ss.str());
}

void RunConfig::set(const std::string& key, const std::string& value) {
  if (!defaults().contains(key)) throw Error(ErrorCode::ConfigError, "unknown config key '" + key + "'");
  values_[key] = value;
}

void RunConfig::set_assignment(const std::string& kv) {
  const auto eq = kv.find('=');
  if (eq == std::string::npos) throw Error(ErrorCode::ConfigError, "expected key=value, got '" + kv + "'");
  set(trim(kv.substr(0, eq)), trim(kv.substr(eq + 1)));
}

const std::string& RunConfig::get(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw Error(ErrorCode::ConfigError, "unknown config key '" + key + "'");
  return it->second;
}

std::string RunConfig::canonical() const {
  std::string out;
  for (const auto& [k, v] : values_) out += k + "=" + v + "\n";
  return out;
}

std::uint64_t RunConfig::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : canonical()) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string RunConfig::hash_hex() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash()));
  return buf;
}

F0Family RunConfig::family() const {
  const std::string& spec = get("family");
  const auto colon = spec.find(':');
  const std::string kind = spec.substr(0, colon);
  const std::string body = colon == std::string::npos ? "" : spec.substr(colon + 1);
  if (kind == "cosine") {
    return CosineFamily{positive("family", to_double("family", body))};
  }
  if (kind == "multibump") {
    std::stringstream ss(body);
    std::string part;
    MultiBumpFamily m;
    bool first = true;
    while (std::getline(ss, part, ':')) {
      if (first) {
        m.a = positive("family", to_double("family", part));
        first = false;
        continue;
      }
      const auto comma = part.find(',');
      if (comma == std::string::npos) throw Error(ErrorCode::ConfigError, "multibump center must be x,y");
      m.centers.emplace_back(to_double("family", part.substr(0, comma)), to_double("family", part.substr(comma + 1)));
    }
    if (m.centers.empty()) throw Error(ErrorCode::ConfigError, "multibump needs at least one center");
    return m;
  }
  if (kind == "tabulated") {
    if (body.empty()) throw Error(ErrorCode::ConfigError, "tabulated family needs a file");
    try {
      return TabulatedFamily{load_field(body), body};
    } catch (const Error& e) {
      throw Error(ErrorCode::ConfigError, std::string("tabulated family: ") + e.what());
    }
  }
  throw Error(ErrorCode::ConfigError, "unknown family '" + spec + "' (cosine:a, multibump:a:x,y:..., tabulated:file)");
}

ProblemOptions RunConfig::problem_options() const {
  ProblemOptions o;
  const std::string& v = get("validation");
  if (v == "strict") {
    o.mode = ValidationMode::strict;
  } else if (v == "allow_degenerate") {
    o.mode = ValidationMode::allow_degenerate;
  } else if (v == "unchecked") {
    o.mode = ValidationMode::unchecked;
  } else {
    throw Error(ErrorCode::ConfigError, "validation must be strict, allow_degenerate or unchecked");
  }
  return o;
}

int RunConfig::n() const {
  const long long n = to_int("n", get("n"));
  if (n < 16 || n > 4096 || (n & (n - 1)) != 0) {
    throw Error(ErrorCode::ConfigError, "n must be a power of two in [16, 4096]");
  }
  return static_cast<int>(n);
}

std::optional<double> RunConfig::lambda() const {
  if (!has_value("lambda")) return std::nullopt;
  return to_double("lambda", get("lambda"));
}

SolverConfig RunConfig::solver() const {
  SolverConfig s;
  const long long iters = to_int("max_iters", get("max_iters"));
  if (iters <= 0) throw Error(ErrorCode::ConfigError, "max_iters must be > 0");
  s.max_iters = static_cast<int>(iters);
  s.step0 = positive("step0", to_double("step0", get("step0")));
  s.grad_tol = positive("grad_tol", to_double("grad_tol", get("grad_tol")));
  s.c_tol = positive("c_tol", to_double("c_tol", get("c_tol")));
  s.res_tol = positive("res_tol", to_double("res_tol", get("res_tol")));
  const std::string& pc = get("preconditioner");
  if (pc == "sobolev") {
    s.preconditioner = Preconditioner::sobolev;
  } else if (pc == "l2") {
    s.preconditioner = Preconditioner::l2;
  } else {
    throw Error(ErrorCode::ConfigError, "preconditioner must be sobolev or l2");
  }
  const std::string& da = get("dealias");
  if (da == "none") {
    s.dealias = Dealias::none;
  } else if (da == "three_halves") {
    s.dealias = Dealias::three_halves;
  } else {
    throw Error(ErrorCode::ConfigError, "dealias must be none or three_halves");
  }
  return s;
}

SweepOptions RunConfig::sweep_options() const {
  SweepOptions o;
  o.solver = solver();
  o.escalate = flag("escalate");
  const long long max_n = to_int("max_n", get("max_n"));
  if (max_n < 16 || max_n > 4096 || (max_n & (max_n - 1)) != 0) {
    throw Error(ErrorCode::ConfigError, "max_n must be a power of two in [16, 4096]");
  }
  o.max_n = static_cast<int>(max_n);
  o.gap_tol = positive("gap_tol", to_double("gap_tol", get("gap_tol")));
  o.peak_min = to_double("peak_min", get("peak_min"));
  return o;
}

std::string RunConfig::schedule() const { return get("schedule"); }
std::string RunConfig::lmax_points() const { return get("lmax_points"); }

PhiOptions RunConfig::phi_options() const {
  PhiOptions o;
  o.auto_refine = flag("auto_refine");
  const long long cap = to_int("max_chart_n", get("max_chart_n"));
  if (cap < 64 || cap > 4096 || (cap & (cap - 1)) != 0) {
    throw Error(ErrorCode::ConfigError, "max_chart_n must be a power of two in [64, 4096]");
  }
  o.max_chart_n = static_cast<int>(cap);
  return o;
}

double RunConfig::sigma() const {
  const double s = to_double("sigma", get("sigma"));
  if (!(s > 0 && s <= 1)) throw Error(ErrorCode::ConfigError, "sigma must lie in (0, 1]");
  return s;
}

int RunConfig::probe_samples() const {
  const long long k = to_int("probe_samples", get("probe_samples"));
  if (k < 1 || k > 1000) throw Error(ErrorCode::ConfigError, "probe_samples must lie in [1, 1000]");
  return static_cast<int>(k);
}

BubbleOptions RunConfig::bubble_options() const {
  BubbleOptions o;
  o.regime_ratio = positive("regime_ratio", to_double("regime_ratio", get("regime_ratio")));
  o.peak_min = to_double("peak_min", get("peak_min"));
  o.R = positive("profile_R", to_double("profile_R", get("profile_R")));
  o.dev_R = positive("dev_R", to_double("dev_R", get("dev_R")));
  const long long rays = to_int("rays", get("rays"));
  const long long radii = to_int("radii", get("radii"));
  if (rays < 1 || rays > 360) throw Error(ErrorCode::ConfigError, "rays must lie in [1, 360]");
  if (radii < 2 || radii > 4096) throw Error(ErrorCode::ConfigError, "radii must lie in [2, 4096]");
  o.rays = static_cast<int>(rays);
  o.radii = static_cast<int>(radii);
  o.mass_factor = positive("mass_factor", to_double("mass_factor", get("mass_factor")));
  return o;
}

bool RunConfig::flag(const std::string& key) const {
  const std::string& v = get(key);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw Error(ErrorCode::ConfigError, key + ": expected true or false, got '" + v + "'");
}

std::filesystem::path RunConfig::out_dir() const {
  if (!has_value("out")) throw Error(ErrorCode::ConfigError, "out must name a directory");
  return get("out");
}

std::optional<std::filesystem::path> RunConfig::warm_start() const {
  if (!has_value("warm_start")) return std::nullopt;
  return std::filesystem::path(get("warm_start"));
}

std::uint64_t RunConfig::seed() const {
  const long long s = to_int("seed", get("seed"));
  if (s < 0) throw Error(ErrorCode::ConfigError, "seed must be >= 0");
  return static_cast<std::uint64_t>(s);
}

void RunConfig::validate() const {
  (void)family();
  (void)problem_options();
  (void)n();
  (void)lambda();
  (void)sweep_options();
  (void)phi_options();
  (void)sigma();
  (void)probe_samples();
  (void)bubble_options();
  (void)flag("compare");
  (void)flag("blowup");
  (void)flag("lmax");
  (void)out_dir();
  (void)seed();
}

}  // namespace curvtorus

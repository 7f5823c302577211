#pragma once

// Run configuration: a plain-text "key = value" file ('#' starts a comment)
// overlaid by command-line overrides. Every output embeds the hash of the
// effective configuration and the artifact version.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "curvtorus/blowup.hpp"
#include "curvtorus/comparison.hpp"
#include "curvtorus/continuation.hpp"

namespace curvtorus {

inline constexpr std::string_view kArtifactVersion = "1.0.0";
inline constexpr std::string_view kSchemaVersion = "v1";

class RunConfig {
 public:
  RunConfig();  // all defaults

  static RunConfig from_file(const std::filesystem::path& path);
  static RunConfig from_text(const std::string& text);

  // Throws ConfigError on unknown keys or unparsable values.
  void set(const std::string& key, const std::string& value);
  void set_assignment(const std::string& key_eq_value);
  const std::string& get(const std::string& key) const;
  bool has_value(const std::string& key) const { return !get(key).empty(); }

  // Sorted "key=value" lines; the hash is FNV-1a 64 over this text.
  std::string canonical() const;
  std::uint64_t hash() const;
  std::string hash_hex() const;

  // Typed views; each validates ranges.
  F0Family family() const;
  ProblemOptions problem_options() const;
  int n() const;
  std::optional<double> lambda() const;
  SolverConfig solver() const;
  SweepOptions sweep_options() const;
  std::string schedule() const;
  std::string lmax_points() const;
  PhiOptions phi_options() const;
  double sigma() const;
  int probe_samples() const;
  BubbleOptions bubble_options() const;
  bool flag(const std::string& key) const;
  std::filesystem::path out_dir() const;
  std::optional<std::filesystem::path> warm_start() const;
  std::uint64_t seed() const;

  // Checks every typed view once so errors surface before any compute.
  void validate() const;

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace curvtorus

#pragma once

// Command drivers behind the CLI. Each returns the process exit code:
// 0 success, 1 configuration or validation error, 2 solver failure.

#include <iosfwd>
#include <string>

#include "curvtorus/config.hpp"

namespace curvtorus {

int cmd_solve(const RunConfig& cfg, std::ostream& out);
int cmd_sweep(const RunConfig& cfg, std::ostream& out);
int cmd_blowup(const RunConfig& cfg, std::ostream& out);
int cmd_compare(const RunConfig& cfg, std::ostream& out);
int cmd_lmax(const RunConfig& cfg, std::ostream& out);

// Dispatches by name and maps library errors to exit codes, printing the
// message on `err`.
int run_command(const std::string& name, const RunConfig& cfg, std::ostream& out, std::ostream& err);

}  // namespace curvtorus

#pragma once

// TORUS-FIELD v1 snapshots: an ASCII header line "TORUS-FIELD v1 n=<n>\n"
// followed by n*n little-endian IEEE-754 float64 values. Value number i*n + j
// is f(x_i, y_j), i.e. row-major with the x index as the row.

#include <filesystem>
#include <iosfwd>

#include "curvtorus/spectral.hpp"

namespace curvtorus {

void write_field(std::ostream& out, const Field& f);
Field read_field(std::istream& in);

void save_field(const std::filesystem::path& path, const Field& f);
Field load_field(const std::filesystem::path& path);

}  // namespace curvtorus

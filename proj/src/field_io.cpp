#include "curvtorus/field_io.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

namespace curvtorus {

namespace {

constexpr std::string_view kMagic = "TORUS-FIELD v1 n=";
constexpr int kMaxSnapshotN = 16384;

std::array<char, 8> encode(double v) {
  auto bits = std::bit_cast<std::uint64_t>(v);
  std::array<char, 8> bytes{};
  for (int b = 0; b < 8; ++b) {
    bytes[b] = static_cast<char>(bits & 0xffu);
    bits >>= 8;
  }
  return bytes;
}

double decode(const std::array<char, 8>& bytes) {
  std::uint64_t bits = 0;
  for (int b = 7; b >= 0; --b) bits = (bits << 8) | static_cast<unsigned char>(bytes[b]);
  return std::bit_cast<double>(bits);
}

}  // namespace

void write_field(std::ostream& out, const Field& f) {
  if (!f.all_finite()) throw Error(ErrorCode::NonFinite, "refusing to write a non-finite field");
  const int n = f.grid().n();
  out << kMagic << n << '\n';
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const auto bytes = encode(f(i, j));
      out.write(bytes.data(), bytes.size());
    }
  }
  if (!out) throw Error(ErrorCode::IoError, "failed writing field snapshot");
}

Field read_field(std::istream& in) {
  std::string header;
  if (!std::getline(in, header) || !header.starts_with(kMagic)) {
    throw Error(ErrorCode::IoError, "missing TORUS-FIELD v1 header");
  }
  const std::string digits = header.substr(kMagic.size());
  if (digits.empty() || digits.size() > 5 || digits.find_first_not_of("0123456789") != std::string::npos) {
    throw Error(ErrorCode::IoError, "malformed grid size in header: " + header);
  }
  const int n = std::stoi(digits);
  if (n < 16 || n > kMaxSnapshotN || (n & (n - 1)) != 0) {
    throw Error(ErrorCode::IoError, "grid size in header must be a power of two in [16, 16384]: " + header);
  }
  Field f{Grid(n)};
  std::array<char, 8> bytes{};
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (!in.read(bytes.data(), bytes.size())) {
        throw Error(ErrorCode::IoError, "field snapshot truncated");
      }
      f(i, j) = decode(bytes);
    }
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw Error(ErrorCode::IoError, "trailing bytes after field payload");
  }
  if (!f.all_finite()) throw Error(ErrorCode::NonFinite, "field snapshot contains non-finite values");
  return f;
}

void save_field(const std::filesystem::path& path, const Field& f) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
  write_field(out, f);
}

Field load_field(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  return read_field(in);
}

}  // namespace curvtorus

#pragma once

// CSV and binary trajectory output.
//
// CSV files start with a `# config-hash=<hex>` comment line followed by the
// header row; numbers are written with 17 significant digits.
//
// Binary trajectory layout (little-endian):
//   "IVRI"              4 bytes magic
//   u32 m               state dimension (time column excluded)
//   u64 count           number of samples
//   f64[count * (m+1)]  rows (t, x_1, ..., x_m)

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ivri/errors.hpp"
#include "ivri/trajectory.hpp"

namespace ivri::io {

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

/// Shortest round-trip-safe text for a double: %.17g.
inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::string& config_hash,
            std::initializer_list<std::string_view> columns)
      : CsvWriter(path, config_hash, std::vector<std::string>(columns.begin(), columns.end())) {}

  CsvWriter(const std::filesystem::path& path, const std::string& config_hash,
            const std::vector<std::string>& columns)
      : out_(path, std::ios::binary), columns_(columns.size()) {
    if (!out_) throw DomainError("cannot open " + path.string() + " for writing");
    out_ << "# config-hash=" << config_hash << '\n';
    for (std::size_t i = 0; i < columns.size(); ++i) out_ << (i ? "," : "") << columns[i];
    out_ << '\n';
  }

  void row(std::span<const double> values) {
    if (values.size() != columns_) throw DomainError("CsvWriter: row width mismatch");
    for (std::size_t i = 0; i < values.size(); ++i) out_ << (i ? "," : "") << format_double(values[i]);
    out_ << '\n';
  }
  void row(std::initializer_list<double> values) { row(std::span<const double>(values.begin(), values.size())); }

 private:
  std::ofstream out_;
  std::size_t columns_;
};

/// Trajectory as CSV with columns `t,<names...>`.
inline void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj,
                                 const std::vector<std::string>& names,
                                 const std::string& config_hash) {
  if (names.size() != traj.dimension()) throw DomainError("write_trajectory_csv: column count");
  std::vector<std::string> cols{"t"};
  cols.insert(cols.end(), names.begin(), names.end());
  CsvWriter w(path, config_hash, cols);
  std::vector<double> row(traj.dimension() + 1);
  for (std::size_t i = 0; i < traj.size(); ++i) {
    row[0] = traj.time(i);
    const auto x = traj.state(i);
    std::copy(x.begin(), x.end(), row.begin() + 1);
    w.row(row);
  }
}

namespace detail {

template <class T>
void put_le(std::ostream& os, T v) {
  unsigned char b[sizeof(T)];
  std::memcpy(b, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
  os.write(reinterpret_cast<const char*>(b), sizeof(T));
}

template <class T>
T get_le(std::istream& is) {
  unsigned char b[sizeof(T)];
  if (!is.read(reinterpret_cast<char*>(b), sizeof(T))) throw DomainError("binary trajectory: truncated file");
  if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
  T v;
  std::memcpy(&v, b, sizeof(T));
  return v;
}

}  // namespace detail

inline void write_trajectory_binary(const std::filesystem::path& path, const Trajectory& traj) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DomainError("cannot open " + path.string() + " for writing");
  os.write("IVRI", 4);
  detail::put_le<std::uint32_t>(os, static_cast<std::uint32_t>(traj.dimension()));
  detail::put_le<std::uint64_t>(os, traj.size());
  for (std::size_t i = 0; i < traj.size(); ++i) {
    detail::put_le<double>(os, traj.time(i));
    for (double v : traj.state(i)) detail::put_le<double>(os, v);
  }
}

inline Trajectory read_trajectory_binary(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DomainError("cannot open " + path.string());
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, "IVRI", 4) != 0)
    throw DomainError("binary trajectory: bad magic");
  const auto m = detail::get_le<std::uint32_t>(is);
  const auto count = detail::get_le<std::uint64_t>(is);
  Trajectory traj(m, {"", "binary", 0.0});
  std::vector<double> x(m);
  for (std::uint64_t i = 0; i < count; ++i) {
    const double t = detail::get_le<double>(is);
    for (auto& v : x) v = detail::get_le<double>(is);
    traj.push_back(t, x);
  }
  return traj;
}

}  // namespace ivri::io

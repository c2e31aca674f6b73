#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "qg/field.hpp"

namespace qg {

/// Write `contents` to `path` via a temporary sibling and a rename, so readers never see a
/// partially written file.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

namespace detail {

template <typename T>
void put_le(std::string& buf, T value) {
  static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big)
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(bytes[i], bytes[sizeof(T) - 1 - i]);
  buf.append(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T get_le(const std::string& buf, std::size_t& pos) {
  if (pos + sizeof(T) > buf.size()) throw std::runtime_error("QGF1: truncated snapshot");
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, buf.data() + pos, sizeof(T));
  if constexpr (std::endian::native == std::endian::big)
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(bytes[i], bytes[sizeof(T) - 1 - i]);
  pos += sizeof(T);
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

}  // namespace detail

/// QGF1 snapshot: "QGF1", u32 nx, u32 ny, f64 lx, f64 ly, then nx*ny f64 coefficients with
/// k as the outer index and l as the inner one. Everything little-endian.
inline std::string encode_snapshot(const SpectralField& f) {
  const Grid& g = f.grid();
  std::string buf = "QGF1";
  buf.reserve(4 + 8 + 16 + 8 * static_cast<std::size_t>(g.nx) * g.ny);
  detail::put_le<std::uint32_t>(buf, static_cast<std::uint32_t>(g.nx));
  detail::put_le<std::uint32_t>(buf, static_cast<std::uint32_t>(g.ny));
  detail::put_le<double>(buf, g.lx);
  detail::put_le<double>(buf, g.ly);
  for (int k = 1; k <= g.nx; ++k)
    for (int l = 1; l <= g.ny; ++l) detail::put_le<double>(buf, f(k, l));
  return buf;
}

inline SpectralField decode_snapshot(const std::string& buf) {
  if (buf.size() < 4 || buf.compare(0, 4, "QGF1") != 0)
    throw std::runtime_error("QGF1: bad magic bytes");
  std::size_t pos = 4;
  const auto nx = detail::get_le<std::uint32_t>(buf, pos);
  const auto ny = detail::get_le<std::uint32_t>(buf, pos);
  const double lx = detail::get_le<double>(buf, pos);
  const double ly = detail::get_le<double>(buf, pos);
  const Grid g(static_cast<int>(nx), static_cast<int>(ny), lx, ly);
  SpectralField f(g);
  for (int k = 1; k <= g.nx; ++k)
    for (int l = 1; l <= g.ny; ++l) f(k, l) = detail::get_le<double>(buf, pos);
  if (pos != buf.size()) throw std::runtime_error("QGF1: trailing bytes after coefficients");
  return f;
}

inline void write_snapshot(const std::filesystem::path& path, const SpectralField& f) {
  write_file_atomic(path, encode_snapshot(f));
}

inline SpectralField read_snapshot(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open snapshot " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return decode_snapshot(ss.str());
}

/// Minimal CSV builder: one header row, doubles printed with 17 significant digits.
class CsvWriter {
public:
  explicit CsvWriter(const std::vector<std::string>& header) {
    out_ << std::setprecision(17);
    for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
    out_ << '\n';
    columns_ = header.size();
  }

  /// Lines starting with '#' placed before the header row.
  void add_preamble(const std::string& line) { preamble_ += "# " + line + "\n"; }

  void row(const std::vector<double>& values) {
    if (values.size() != columns_) throw std::logic_error("CsvWriter: column count mismatch");
    for (std::size_t i = 0; i < values.size(); ++i) out_ << (i ? "," : "") << values[i];
    out_ << '\n';
  }

  std::string str() const { return preamble_ + out_.str(); }
  void save(const std::filesystem::path& path) const { write_file_atomic(path, str()); }

private:
  std::string preamble_;
  std::ostringstream out_;
  std::size_t columns_ = 0;
};

}  // namespace qg

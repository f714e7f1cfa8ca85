#pragma once

// Snapshot files and the diagnostics CSV.
//
// Snapshot layout (little-endian):
//   0  char[7]  "GMHD2D\0"
//   7  u8       0
//   8  u32      version (1)
//   12 u32      n
//   16 u32      reserved (0)
//   20 f64      time
//   28 f64[n*n] omega, row-major (row = x2)
//      f64[n*n] j

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <string>
#include <vector>

#include "diagnostics.hpp"
#include "dynamics.hpp"
#include "error.hpp"
#include "spectral.hpp"

namespace gmhd {

inline constexpr std::uint32_t kSnapshotVersion = 1;
inline constexpr std::size_t kSnapshotHeaderBytes = 28;

inline std::size_t snapshot_size(int n) {
  return kSnapshotHeaderBytes + 16 * static_cast<std::size_t>(n) * static_cast<std::size_t>(n);
}

namespace io_detail {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

template <class T>
void put(std::vector<unsigned char>& buf, std::size_t at, T v) {
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  std::memcpy(buf.data() + at, bytes, sizeof(T));
}

template <class T>
T get(const std::vector<unsigned char>& buf, std::size_t at) {
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, buf.data() + at, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  T v;
  std::memcpy(&v, bytes, sizeof(T));
  return v;
}

inline constexpr char kMagic[8] = {'G', 'M', 'H', 'D', '2', 'D', '\0', '\0'};

inline void write_file(const std::string& path, const void* data, std::size_t size) {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (f == nullptr) throw Error(errc::io_failure, "cannot open " + path + " for writing");
  const std::size_t wrote = std::fwrite(data, 1, size, f);
  const int closed = std::fclose(f);
  if (wrote != size || closed != 0) throw Error(errc::io_failure, "short write to " + path);
}

}  // namespace io_detail

inline std::vector<unsigned char> encode_snapshot(const SimState& s) {
  const auto& g = *s.omega.grid();
  const std::size_t cells = g.real_size();
  std::vector<unsigned char> buf(snapshot_size(g.n()), 0);
  std::memcpy(buf.data(), io_detail::kMagic, 8);
  io_detail::put<std::uint32_t>(buf, 8, kSnapshotVersion);
  io_detail::put<std::uint32_t>(buf, 12, static_cast<std::uint32_t>(g.n()));
  io_detail::put<std::uint32_t>(buf, 16, 0);
  io_detail::put<double>(buf, 20, s.t);
  const RealField w = inverse(s.omega);
  const RealField j = inverse(s.j);
  for (std::size_t i = 0; i < cells; ++i) {
    io_detail::put<double>(buf, kSnapshotHeaderBytes + 8 * i, w.values()[i]);
    io_detail::put<double>(buf, kSnapshotHeaderBytes + 8 * (cells + i), j.values()[i]);
  }
  return buf;
}

inline void write_snapshot(const std::string& path, const SimState& s) {
  const auto buf = encode_snapshot(s);
  io_detail::write_file(path, buf.data(), buf.size());
}

/// Decodes a snapshot; `grid` is reused when its size matches, otherwise a
/// new grid is made (pass nullptr to always make one).
inline SimState decode_snapshot(const std::vector<unsigned char>& buf, GridPtr grid = nullptr) {
  if (buf.size() < kSnapshotHeaderBytes) throw Error(errc::corrupt_snapshot, "file shorter than the header");
  if (std::memcmp(buf.data(), io_detail::kMagic, 8) != 0) throw Error(errc::corrupt_snapshot, "bad magic");
  const auto version = io_detail::get<std::uint32_t>(buf, 8);
  if (version != kSnapshotVersion) {
    throw Error(errc::corrupt_snapshot, "unsupported version " + std::to_string(version));
  }
  const auto n = io_detail::get<std::uint32_t>(buf, 12);
  if (n < 4 || n % 2 != 0 || n > 65536) throw Error(errc::corrupt_snapshot, "bad grid size " + std::to_string(n));
  if (buf.size() != snapshot_size(static_cast<int>(n))) {
    throw Error(errc::corrupt_snapshot, "size " + std::to_string(buf.size()) + " does not match n=" +
                                            std::to_string(n));
  }
  if (!grid || grid->n() != static_cast<int>(n)) grid = make_grid(static_cast<int>(n));
  const std::size_t cells = grid->real_size();
  RealField w(grid);
  RealField j(grid);
  for (std::size_t i = 0; i < cells; ++i) {
    w.values()[i] = io_detail::get<double>(buf, kSnapshotHeaderBytes + 8 * i);
    j.values()[i] = io_detail::get<double>(buf, kSnapshotHeaderBytes + 8 * (cells + i));
  }
  SimState s;
  s.t = io_detail::get<double>(buf, 20);
  s.omega = forward(w);
  s.j = forward(j);
  return s;
}

inline SimState read_snapshot(const std::string& path, GridPtr grid = nullptr) {
  std::FILE* f = std::fopen(path.c_str(), "rb");
  if (f == nullptr) throw Error(errc::io_failure, "cannot open snapshot " + path);
  std::vector<unsigned char> buf;
  unsigned char chunk[65536];
  for (std::size_t got; (got = std::fread(chunk, 1, sizeof chunk, f)) > 0;) buf.insert(buf.end(), chunk, chunk + got);
  std::fclose(f);
  return decode_snapshot(buf, std::move(grid));
}

inline std::string snapshot_name(long step) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "snapshot_%06ld.bin", step);
  return buf;
}

/// Writes the header at construction and one row per record, '\n' endings.
class CsvWriter {
 public:
  explicit CsvWriter(const std::string& path) : path_(path) {
    file_ = std::fopen(path.c_str(), "wb");
    if (file_ == nullptr) throw Error(errc::io_failure, "cannot open " + path + " for writing");
    line(DiagnosticsRecord::csv_header());
  }
  CsvWriter(const CsvWriter&) = delete;
  CsvWriter& operator=(const CsvWriter&) = delete;
  ~CsvWriter() {
    if (file_ != nullptr) std::fclose(file_);
  }

  void write(const DiagnosticsRecord& r) { line(r.csv_row()); }

  void close() {
    if (file_ != nullptr && std::fclose(file_) != 0) {
      file_ = nullptr;
      throw Error(errc::io_failure, "error closing " + path_);
    }
    file_ = nullptr;
  }

 private:
  void line(const std::string& text) {
    if (std::fputs(text.c_str(), file_) < 0 || std::fputc('\n', file_) == EOF) {
      throw Error(errc::io_failure, "write failed on " + path_);
    }
  }

  std::string path_;
  std::FILE* file_ = nullptr;
};

/// Parses a diagnostics CSV written by CsvWriter.
inline std::vector<DiagnosticsRecord> read_diagnostics_csv(const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "rb");
  if (f == nullptr) throw Error(errc::io_failure, "cannot open " + path);
  std::string text;
  char buf[4096];
  for (std::size_t got; (got = std::fread(buf, 1, sizeof buf, f)) > 0;) text.append(buf, got);
  std::fclose(f);

  std::vector<DiagnosticsRecord> out;
  std::size_t pos = 0;
  bool header = true;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    const std::string row = text.substr(pos, end - pos);
    pos = end + 1;
    if (header) {
      if (row != DiagnosticsRecord::csv_header()) throw Error(errc::io_failure, "unexpected CSV header in " + path);
      header = false;
      continue;
    }
    std::array<double, DiagnosticsRecord::kColumns> v{};
    const char* p = row.c_str();
    for (int c = 0; c < DiagnosticsRecord::kColumns; ++c) {
      char* stop = nullptr;
      v[c] = std::strtod(p, &stop);
      if (stop == p || (c + 1 < DiagnosticsRecord::kColumns && *stop != ',')) {
        throw Error(errc::io_failure, "malformed CSV row in " + path);
      }
      p = stop + 1;
    }
    out.push_back(DiagnosticsRecord::from_values(v));
  }
  if (header) throw Error(errc::io_failure, "empty CSV " + path);
  return out;
}

}  // namespace gmhd

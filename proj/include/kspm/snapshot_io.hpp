#ifndef KSPM_SNAPSHOT_IO_HPP
#define KSPM_SNAPSHOT_IO_HPP

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "kspm/errors.hpp"
#include "kspm/grid.hpp"

namespace kspm {

inline constexpr std::array<char, 4> kSnapshotMagic{'K', 'S', 'P', 'M'};
inline constexpr std::uint32_t kSnapshotVersion = 1;
inline constexpr std::size_t kSnapshotHeaderBytes = 16;

/// Size in bytes of a snapshot holding an nx-by-ny field.
inline std::uintmax_t snapshot_bytes(const Grid& g) {
  return kSnapshotHeaderBytes + 8u * static_cast<std::uintmax_t>(g.size());
}

namespace detail {

inline void put_le(std::vector<unsigned char>& out, std::uint64_t v, int bytes) {
  for (int b = 0; b < bytes; ++b) out.push_back(static_cast<unsigned char>(v >> (8 * b)));
}

inline std::uint64_t get_le(const unsigned char* p, int bytes) {
  std::uint64_t v = 0;
  for (int b = 0; b < bytes; ++b) v |= static_cast<std::uint64_t>(p[b]) << (8 * b);
  return v;
}

}  // namespace detail

/// Serialized form: "KSPM", u32 version, u32 nx, u32 ny, then nx*ny
/// little-endian IEEE doubles in row-major order.
inline std::vector<unsigned char> encode_snapshot(const Field& f) {
  std::vector<unsigned char> out;
  out.reserve(static_cast<std::size_t>(snapshot_bytes(f.grid())));
  out.insert(out.end(), kSnapshotMagic.begin(), kSnapshotMagic.end());
  detail::put_le(out, kSnapshotVersion, 4);
  detail::put_le(out, static_cast<std::uint32_t>(f.grid().nx()), 4);
  detail::put_le(out, static_cast<std::uint32_t>(f.grid().ny()), 4);
  for (double v : f.values()) detail::put_le(out, std::bit_cast<std::uint64_t>(v), 8);
  return out;
}

inline Field decode_snapshot(const std::vector<unsigned char>& bytes, const std::string& origin = "snapshot") {
  if (bytes.size() < kSnapshotHeaderBytes) {
    throw FormatError(origin + ": truncated header (" + std::to_string(bytes.size()) + " bytes)");
  }
  if (!std::equal(kSnapshotMagic.begin(), kSnapshotMagic.end(), bytes.begin())) {
    throw FormatError(origin + ": bad magic, not a KSPM snapshot");
  }
  const auto version = detail::get_le(bytes.data() + 4, 4);
  if (version != kSnapshotVersion) {
    throw FormatError(origin + ": unsupported snapshot version " + std::to_string(version));
  }
  const auto nx = detail::get_le(bytes.data() + 8, 4);
  const auto ny = detail::get_le(bytes.data() + 12, 4);
  if (nx < static_cast<std::uint64_t>(Grid::kMinCells) || ny < static_cast<std::uint64_t>(Grid::kMinCells) ||
      nx > (1u << 20) || ny > (1u << 20)) {
    throw FormatError(origin + ": implausible dimensions " + std::to_string(nx) + "x" + std::to_string(ny));
  }
  const Grid g(static_cast<int>(nx), static_cast<int>(ny));
  const std::uintmax_t expected = snapshot_bytes(g);
  if (bytes.size() != expected) {
    throw FormatError(origin + ": header declares " + std::to_string(nx) + "x" + std::to_string(ny) +
                      " (" + std::to_string(expected) + " bytes) but payload has " +
                      std::to_string(bytes.size()) + " bytes");
  }
  Field f(g);
  const unsigned char* p = bytes.data() + kSnapshotHeaderBytes;
  for (std::size_t k = 0; k < f.size(); ++k) f[k] = std::bit_cast<double>(detail::get_le(p + 8 * k, 8));
  return f;
}

inline void write_snapshot(const Field& f, const std::filesystem::path& path) {
  const auto bytes = encode_snapshot(f);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw FormatError("failed writing " + path.string());
}

inline Field read_snapshot(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open snapshot " + path.string());
  const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_snapshot(bytes, path.string());
}

}  // namespace kspm

#endif  // KSPM_SNAPSHOT_IO_HPP

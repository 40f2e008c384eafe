#ifndef KSPM_RNG_HPP
#define KSPM_RNG_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <utility>

namespace kspm {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
///
/// Stateless: the output is a pure function of (counter, key), so any
/// increment of any path can be regenerated independently.
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static constexpr Counter generate(Counter ctr, Key key) noexcept {
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += kWeyl0;
        key[1] += kWeyl1;
      }
      const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * ctr[0];
      const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * ctr[2];
      const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
      const auto lo0 = static_cast<std::uint32_t>(p0);
      const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
      const auto lo1 = static_cast<std::uint32_t>(p1);
      ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    }
    return ctr;
  }

 private:
  static constexpr std::uint32_t kMul0 = 0xD2511F53u;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
};

/// SplitMix64 finalizer, used to derive well-separated seeds.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

/// Seed for stream `stream` of path `path` under a base seed.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t path,
                                    std::uint64_t stream) noexcept {
  return mix64(mix64(base ^ mix64(path)) + stream);
}

/// Two independent standard normals drawn from the block (seed, a, b, c).
///
/// Box-Muller on two 53-bit uniforms in (0, 1]; written out by hand so the
/// stream is identical across standard libraries.
inline std::pair<double, double> normal_pair(std::uint64_t seed, std::uint64_t a,
                                             std::uint32_t b, std::uint32_t c) noexcept {
  const Philox4x32::Key key{static_cast<std::uint32_t>(seed),
                            static_cast<std::uint32_t>(seed >> 32)};
  const Philox4x32::Counter ctr{static_cast<std::uint32_t>(a),
                                static_cast<std::uint32_t>(a >> 32), b, c};
  const auto r = Philox4x32::generate(ctr, key);
  const std::uint64_t x0 = (static_cast<std::uint64_t>(r[0]) << 32) | r[1];
  const std::uint64_t x1 = (static_cast<std::uint64_t>(r[2]) << 32) | r[3];
  constexpr double kInv53 = 1.0 / 9007199254740992.0;
  const double u0 = static_cast<double>((x0 >> 11) + 1) * kInv53;
  const double u1 = static_cast<double>(x1 >> 11) * kInv53;
  const double radius = std::sqrt(-2.0 * std::log(u0));
  const double angle = 2.0 * std::numbers::pi * u1;
  return {radius * std::cos(angle), radius * std::sin(angle)};
}

}  // namespace kspm

#endif  // KSPM_RNG_HPP

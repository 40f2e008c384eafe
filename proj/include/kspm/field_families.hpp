#ifndef KSPM_FIELD_FAMILIES_HPP
#define KSPM_FIELD_FAMILIES_HPP

#include <cmath>
#include <cstdint>

#include "kspm/errors.hpp"
#include "kspm/grid.hpp"
#include "kspm/rng.hpp"
#include "kspm/spectral.hpp"

namespace kspm {

/// Random nonnegative field spanned by the cosine modes with max(m1, m2) <= kmax.
///
/// Coefficients are standard normals weighted by (1 + lambda)^(-decay / 2);
/// the constant mode is then shifted so that the minimum equals `floor`.
/// The underlying continuum function depends only on (seed, kmax, decay),
/// so the same seed sampled on finer grids gives the same function.
inline Field band_limited_field(const SpectralBasis& basis, std::uint64_t seed, int kmax,
                                double decay = 1.0, double floor = 0.0) {
  const Grid& g = basis.grid();
  if (kmax < 0 || kmax >= g.nx() || kmax >= g.ny()) {
    throw InvalidArgument("band limit must be below the grid resolution");
  }
  Spectrum c(g);
  for (int m2 = 0; m2 <= kmax; ++m2) {
    for (int m1 = 0; m1 <= kmax; ++m1) {
      const double z = normal_pair(seed, static_cast<std::uint64_t>(m1),
                                   static_cast<std::uint32_t>(m2), 0x6669656cu).first;
      c(m1, m2) = z * std::pow(1.0 + basis.lambda(m1, m2), -0.5 * decay);
    }
  }
  Field f = basis.from_spectral(c);
  const double shift = floor - f.min();
  for (auto& v : f.values()) v += shift;
  return f;
}

}  // namespace kspm

#endif  // KSPM_FIELD_FAMILIES_HPP

#pragma once

#include <cstdint>
#include <random>

#include "uaplab/numcore/network.hpp"

namespace uaplab::num {

// mt19937_64 is fully specified by the standard; the distributions below are
// written out so draws are identical across standard library implementations.
using Rng = std::mt19937_64;

/// Uniform in [0, 1) with 53 bits of resolution.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline double uniform(Rng& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }

inline std::size_t uniform_index(Rng& rng, std::size_t n) {
  return static_cast<std::size_t>(uniform01(rng) * static_cast<double>(n));
}

/// He-uniform initialised affine layer with zero bias.
AffineLayer random_affine(std::size_t in, std::size_t out, Rng& rng);

/// He-uniform initialised conv layer with zero bias.
ConvLayer random_conv(std::size_t in_channels, std::size_t out_channels, std::size_t kernel,
                      std::size_t stride, Rng& rng);

}  // namespace uaplab::num

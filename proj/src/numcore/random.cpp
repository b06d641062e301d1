#include "uaplab/numcore/random.hpp"

#include <cmath>

namespace uaplab::num {

AffineLayer random_affine(std::size_t in, std::size_t out, Rng& rng) {
  AffineLayer a{Tensor({out, in}), Tensor({out})};
  const double limit = std::sqrt(6.0 / static_cast<double>(in));
  for (double& w : a.weight.data()) w = uniform(rng, -limit, limit);
  return a;
}

ConvLayer random_conv(std::size_t in_channels, std::size_t out_channels, std::size_t kernel,
                      std::size_t stride, Rng& rng) {
  ConvLayer c{Tensor({out_channels, in_channels, kernel, kernel}), Tensor({out_channels}), stride};
  const double limit = std::sqrt(6.0 / static_cast<double>(in_channels * kernel * kernel));
  for (double& w : c.weight.data()) w = uniform(rng, -limit, limit);
  return c;
}

}  // namespace uaplab::num

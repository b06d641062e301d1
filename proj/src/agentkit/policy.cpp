#include "uaplab/agentkit/policy.hpp"

#include <stdexcept>

namespace uaplab::agent {

std::size_t argmax(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("argmax of an empty vector");
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

std::size_t act_greedy(const num::Network& q, const num::Tensor& s) {
  return argmax(q.forward(s).data());
}

}  // namespace uaplab::agent

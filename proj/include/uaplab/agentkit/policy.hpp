#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

#include "uaplab/numcore/network.hpp"

namespace uaplab::agent {

/// Index of the largest value; ties go to the lowest index.
std::size_t argmax(std::span<const double> values);

/// Greedy action of a Q-network.
std::size_t act_greedy(const num::Network& q, const num::Tensor& s);

/// Hook through which an adversary touches what the agent sees.
///
/// inject() runs once per incoming preprocessed observation, before the frame
/// is written to the agent's memory; slot is the frame's index inside its
/// skip window (the reset frame uses the newest slot). observe_state() gives
/// read-only access to the memory at decision time. Attacks that need to
/// rewrite the stored state report rewrites_memory() and implement
/// rewrite_state(); nothing else may change the state.
class Injector {
 public:
  virtual ~Injector() = default;
  virtual void begin_episode(std::uint64_t /*seed*/) {}
  virtual void inject(num::Tensor& frame, std::size_t slot) = 0;
  virtual void observe_state(const num::Tensor& /*state*/) {}
  virtual bool rewrites_memory() const { return false; }
  virtual void rewrite_state(num::Tensor& /*state*/) {}
};

}  // namespace uaplab::agent

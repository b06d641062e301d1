#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <vector>

#include "uaplab/agentkit/evaluate.hpp"
#include "uaplab/attackforge/perturbation.hpp"
#include "uaplab/numcore/network.hpp"

namespace uaplab::attack {

/// Adds a fixed perturbation: per_slot frames go to the matching slot of the
/// skip window, slot_tied frames go everywhere, per_state perturbations are
/// added to the whole state at decision time (a memory rewrite). Results are
/// clamped to [0, 1].
std::unique_ptr<agent::Injector> make_injector(const Perturbation& r);
agent::InjectorFactory injector_factory(const Perturbation& r);

/// True when applying r needs write access to the agent's memory.
bool requires_memory_rewrite(const Perturbation& r);

/// Fresh uniform [-epsilon, epsilon] noise on every incoming frame, seeded
/// per episode from (seed, episode seed).
agent::InjectorFactory noise_injector_factory(double epsilon, std::uint64_t seed);

/// FGSM recomputed on every decision state and written into memory.
agent::InjectorFactory fgsm_injector_factory(const num::Network& q, double epsilon);

/// Thread-safe log of per-episode OSFW generation times, in seconds.
class OnlineCostLog {
 public:
  void record(double seconds);
  std::vector<double> samples() const;

 private:
  mutable std::mutex mu_;
  std::vector<double> samples_;
};

/// OSFW inside the episode: the first k decision states are observed clean,
/// the perturbation is generated from them (timed into log when given) and
/// then added to every later frame.
agent::InjectorFactory osfw_injector_factory(const num::Network& q, std::size_t k, double epsilon,
                                             std::shared_ptr<OnlineCostLog> log = nullptr);

}  // namespace uaplab::attack

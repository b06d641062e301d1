#pragma once

#include <cstdint>
#include <functional>

#include "uaplab/agentkit/agent_checkpoint.hpp"
#include "uaplab/envlab/env_spec.hpp"
#include "uaplab/numcore/network.hpp"

namespace uaplab::agent {

/// DQN knobs. Decision steps are counted, not raw frames.
struct TrainConfig {
  double discount = 0.9;
  double learning_rate = 1e-3;
  std::size_t replay_capacity = 10000;
  std::size_t batch_size = 32;
  std::size_t target_sync_interval = 500;
  double epsilon_start = 1.0;
  double epsilon_end = 0.05;
  std::size_t epsilon_decay_steps = 8000;
  std::size_t warmup_steps = 500;
  std::size_t train_interval = 2;  ///< gradient updates every this many steps
  std::size_t total_steps = 24000;
  std::uint64_t seed = 1;
  /// Greedy episodes used to record the clean return in the checkpoint.
  std::uint64_t eval_seed_begin = 1000;
  std::size_t eval_episodes = 10;

  void validate() const;
};

/// Pixel-input Q-network: conv(N->8, 4x4, stride 2) - relu - flatten -
/// affine(64) - relu - affine(|A|).
num::Network make_q_network(const env::EnvSpec& spec, std::uint64_t seed);

/// Called every progress_interval steps with (step, running mean episode return).
using TrainProgress = std::function<void(std::size_t, double)>;

/// Trains a Double-DQN agent with Huber loss and Adam. Deterministic in cfg.seed.
/// Throws num::NumericError if the loss diverges.
AgentCheckpoint train_dqn(const env::EnvSpec& spec, const TrainConfig& cfg,
                          const TrainProgress& progress = {},
                          std::size_t progress_interval = 2000);

}  // namespace uaplab::agent

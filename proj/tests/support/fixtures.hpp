#pragma once

#include <cstdint>

#include "uaplab/agentkit/agent_checkpoint.hpp"
#include "uaplab/attackforge/continuous.hpp"
#include "uaplab/attackforge/train_set.hpp"
#include "uaplab/bench/experiment.hpp"
#include "uaplab/numcore/network.hpp"
#include "uaplab/numcore/random.hpp"

namespace uaplab::testkit {

/// The default-config catch agent. Trained once and cached in the build tree;
/// later calls load the cache. seconds_to_train reports the time measured
/// when the cache was created.
struct TrainedAgent {
  agent::AgentCheckpoint agent;
  double seconds_to_train = 0.0;
  bool from_cache = false;
};
const TrainedAgent& trained_catch_agent();

/// D_train from the default monitored episode.
const attack::TrainSet& catch_train_set();

/// The trained agent under one attack over an epsilon list: 10 episodes from
/// seed 1000, perturbations fitted to catch_train_set().
bench::AttackReport run_catch_attack(bench::AttackKind kind, const std::vector<double>& epsilons,
                                     std::size_t episodes = 10);

/// Random net over in_shape drawn from a small architecture menu.
num::Network random_network(num::Rng& rng, const num::Shape& in_shape, std::size_t out_dim, bool with_conv);
num::Tensor random_tensor(num::Rng& rng, const num::Shape& shape, double lo = -1.0, double hi = 1.0);

/// Single affine layer Q(s) = W s + b.
num::Network linear_network(const num::Tensor& weight, const num::Tensor& bias);

/// V(s) = -||s||^2.
class QuadraticValue final : public attack::ValueModel {
 public:
  explicit QuadraticValue(num::Shape shape) : shape_(std::move(shape)) {}
  const num::Shape& state_shape() const override { return shape_; }
  double value(const num::Tensor& s) const override { return -s.squared_norm(); }
  num::Tensor gradient(const num::Tensor& s) const override { return -2.0 * s; }

 private:
  num::Shape shape_;
};

}  // namespace uaplab::testkit

#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "uaplab/agentkit/policy.hpp"
#include "uaplab/envlab/trace.hpp"

namespace uaplab::agent {

using InjectorFactory = std::function<std::unique_ptr<Injector>()>;

struct EvaluationResult {
  double mean_return = 0.0;
  double std_return = 0.0;  ///< population standard deviation
  double losing_rate = 0.0;
  std::vector<env::EpisodeTrace> traces;  ///< in seed order
};

/// Plays one greedy episode. The injector, when given, sees every incoming
/// preprocessed frame before it reaches the agent's memory.
env::EpisodeTrace run_episode(const num::Network& q, const env::EnvSpec& spec, std::uint64_t seed,
                              Injector* injector = nullptr);

/// Plays episodes.size() greedy episodes, one per seed. A fresh injector is
/// built per episode. workers > 1 fans episodes out over threads; results are
/// aggregated in seed order so they do not depend on scheduling.
EvaluationResult evaluate(const num::Network& q, const env::EnvSpec& spec, std::size_t episodes,
                          std::span<const std::uint64_t> seeds,
                          const InjectorFactory& injector = {}, std::size_t workers = 1);

EvaluationResult summarize(std::vector<env::EpisodeTrace> traces);

std::vector<std::uint64_t> seed_range(std::uint64_t begin, std::size_t count);

}  // namespace uaplab::agent

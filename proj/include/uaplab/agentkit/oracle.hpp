#pragma once

#include <cstdint>
#include <span>

#include "uaplab/agentkit/evaluate.hpp"

namespace uaplab::agent {

/// Hand-coded catch player reading the true game state: step the paddle
/// towards the ball's column, stay when aligned.
std::size_t catch_oracle_action(const env::CatchGame& game);

/// Plays one catch episode with the oracle. Throws for other games.
env::EpisodeTrace run_oracle_episode(const env::EnvSpec& spec, std::uint64_t seed);

EvaluationResult evaluate_oracle(const env::EnvSpec& spec, std::span<const std::uint64_t> seeds);

}  // namespace uaplab::agent

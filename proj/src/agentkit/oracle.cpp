#include "uaplab/agentkit/oracle.hpp"

#include <stdexcept>

#include "uaplab/envlab/environment.hpp"

namespace uaplab::agent {

std::size_t catch_oracle_action(const env::CatchGame& game) {
  if (game.ball_col() < game.paddle_center()) return env::CatchGame::kLeft;
  if (game.ball_col() > game.paddle_center()) return env::CatchGame::kRight;
  return env::CatchGame::kStay;
}

env::EpisodeTrace run_oracle_episode(const env::EnvSpec& spec, std::uint64_t seed) {
  if (spec.game != env::GameKind::Catch) throw std::invalid_argument("the oracle only plays catch");
  env::Environment environment(spec);
  environment.reset(seed);
  env::EpisodeTrace trace;
  trace.seed = seed;
  while (!environment.done()) {
    const auto& game = dynamic_cast<const env::CatchGame&>(environment.game());
    const std::size_t action = catch_oracle_action(game);
    const env::StepResult step = environment.step(action);
    trace.record(action, step.reward);
    if (step.done) trace.terminal = step.terminal;
  }
  return trace;
}

EvaluationResult evaluate_oracle(const env::EnvSpec& spec, std::span<const std::uint64_t> seeds) {
  std::vector<env::EpisodeTrace> traces;
  for (std::uint64_t s : seeds) traces.push_back(run_oracle_episode(spec, s));
  return summarize(std::move(traces));
}

}  // namespace uaplab::agent

#include "uaplab/agentkit/evaluate.hpp"

#include <cmath>
#include <future>
#include <stdexcept>

#include "uaplab/envlab/environment.hpp"

namespace uaplab::agent {

env::EpisodeTrace run_episode(const num::Network& q, const env::EnvSpec& spec, std::uint64_t seed,
                              Injector* injector) {
  env::Environment environment(spec);
  environment.reset(seed);
  env::FrameStack memory(spec.frame_skip, spec.height, spec.width);
  if (injector != nullptr) injector->begin_episode(seed);

  num::Tensor frame = env::preprocess(environment.initial_observation(), spec);
  if (injector != nullptr) injector->inject(frame, spec.frame_skip - 1);
  memory.fill(frame);

  env::EpisodeTrace trace;
  trace.seed = seed;
  while (!environment.done()) {
    std::size_t action = 0;
    if (injector == nullptr) {
      action = act_greedy(q, memory.state());
    } else {
      injector->observe_state(memory.state());
      if (injector->rewrites_memory()) {
        num::Tensor rewritten = memory.state();
        injector->rewrite_state(rewritten);
        action = act_greedy(q, rewritten);
      } else {
        action = act_greedy(q, memory.state());
      }
    }
    env::StepResult step = environment.step(action);
    for (std::size_t slot = 0; slot < step.observations.size(); ++slot) {
      frame = env::preprocess(step.observations[slot], spec);
      if (injector != nullptr) injector->inject(frame, slot);
      memory.push(frame);
    }
    trace.record(action, step.reward);
    if (step.done) trace.terminal = step.terminal;
  }
  return trace;
}

EvaluationResult summarize(std::vector<env::EpisodeTrace> traces) {
  if (traces.empty()) throw std::invalid_argument("no episodes to summarize");
  EvaluationResult result;
  const double n = static_cast<double>(traces.size());
  double lost = 0.0;
  for (const auto& t : traces) {
    result.mean_return += t.total_return;
    if (t.terminal == env::Terminal::Lose) lost += 1.0;
  }
  result.mean_return /= n;
  double var = 0.0;
  for (const auto& t : traces) var += (t.total_return - result.mean_return) * (t.total_return - result.mean_return);
  result.std_return = std::sqrt(var / n);
  result.losing_rate = lost / n;
  result.traces = std::move(traces);
  return result;
}

EvaluationResult evaluate(const num::Network& q, const env::EnvSpec& spec, std::size_t episodes,
                          std::span<const std::uint64_t> seeds, const InjectorFactory& injector,
                          std::size_t workers) {
  if (episodes == 0) throw std::invalid_argument("evaluate needs at least one episode");
  if (seeds.size() != episodes) {
    throw std::invalid_argument("evaluate: " + std::to_string(episodes) + " episodes but " +
                                std::to_string(seeds.size()) + " seeds");
  }
  const auto play = [&](std::size_t i) {
    std::unique_ptr<Injector> hook = injector ? injector() : nullptr;
    return run_episode(q, spec, seeds[i], hook.get());
  };

  std::vector<env::EpisodeTrace> traces(episodes);
  if (workers <= 1) {
    for (std::size_t i = 0; i < episodes; ++i) traces[i] = play(i);
  } else {
    for (std::size_t start = 0; start < episodes; start += workers) {
      std::vector<std::future<env::EpisodeTrace>> batch;
      for (std::size_t i = start; i < std::min(episodes, start + workers); ++i) {
        batch.push_back(std::async(std::launch::async, play, i));
      }
      for (std::size_t j = 0; j < batch.size(); ++j) traces[start + j] = batch[j].get();
    }
  }
  return summarize(std::move(traces));
}

std::vector<std::uint64_t> seed_range(std::uint64_t begin, std::size_t count) {
  std::vector<std::uint64_t> seeds(count);
  for (std::size_t i = 0; i < count; ++i) seeds[i] = begin + i;
  return seeds;
}

}  // namespace uaplab::agent

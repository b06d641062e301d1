#include "support/fixtures.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <mutex>

#include <unistd.h>

#include "uaplab/agentkit/dqn.hpp"

#ifndef UAPLAB_FIXTURE_DIR
#define UAPLAB_FIXTURE_DIR "."
#endif

namespace uaplab::testkit {
namespace fs = std::filesystem;

const TrainedAgent& trained_catch_agent() {
  static TrainedAgent cached;
  static std::once_flag once;
  std::call_once(once, [] {
    const fs::path dir = UAPLAB_FIXTURE_DIR;
    const fs::path ckpt = dir / "catch_agent.ckpt";
    const fs::path timing = dir / "catch_agent.seconds";
    if (fs::exists(ckpt) && fs::exists(timing)) {
      cached.agent = agent::load_agent(ckpt);
      std::ifstream(timing) >> cached.seconds_to_train;
      cached.from_cache = true;
      return;
    }
    const auto start = std::chrono::steady_clock::now();
    cached.agent = agent::train_dqn(env::catch_spec(), agent::TrainConfig{});
    cached.seconds_to_train = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    fs::create_directories(dir);
    // Write to a temporary first so a concurrent test never sees half a file.
    const fs::path tmp = dir / ("catch_agent.ckpt.tmp" + std::to_string(::getpid()));
    agent::save_agent(tmp, cached.agent);
    fs::rename(tmp, ckpt);
    std::ofstream(timing) << cached.seconds_to_train << '\n';
  });
  return cached;
}

const attack::TrainSet& catch_train_set() {
  static const attack::TrainSet d = [] {
    const auto& a = trained_catch_agent().agent;
    return attack::collect_train_set(a.q, a.spec, 1);
  }();
  return d;
}

bench::AttackReport run_catch_attack(bench::AttackKind kind, const std::vector<double>& epsilons,
                                     std::size_t episodes) {
  bench::ExperimentConfig cfg;
  cfg.attack = kind;
  cfg.epsilons = epsilons;
  cfg.episodes = episodes;
  return bench::run_experiment(cfg, trained_catch_agent().agent, catch_train_set(), nullptr);
}

num::Tensor random_tensor(num::Rng& rng, const num::Shape& shape, double lo, double hi) {
  num::Tensor t(shape);
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = num::uniform(rng, lo, hi);
  return t;
}

num::Network random_network(num::Rng& rng, const num::Shape& in_shape, std::size_t out_dim, bool with_conv) {
  std::vector<num::Layer> layers;
  num::Shape shape = in_shape;
  if (with_conv) {
    const std::size_t kernel = 2 + num::uniform_index(rng, 2);
    const std::size_t stride = 1 + num::uniform_index(rng, 2);
    num::ConvLayer conv = num::random_conv(in_shape[0], 2 + num::uniform_index(rng, 2), kernel, stride, rng);
    conv.bias = random_tensor(rng, conv.bias.shape(), -0.1, 0.1);
    shape = num::conv_output_shape(conv, in_shape);
    layers.emplace_back(std::move(conv));
    layers.emplace_back(num::ReluLayer{});
    layers.emplace_back(num::FlattenLayer{});
  } else if (in_shape.size() > 1) {
    layers.emplace_back(num::FlattenLayer{});
  }
  const std::size_t flat = num::element_count(shape);
  const std::size_t hidden = 3 + num::uniform_index(rng, 4);
  num::AffineLayer a1 = num::random_affine(flat, hidden, rng);
  a1.bias = random_tensor(rng, a1.bias.shape(), -0.1, 0.1);
  layers.emplace_back(std::move(a1));
  layers.emplace_back(num::ReluLayer{});
  num::AffineLayer a2 = num::random_affine(hidden, out_dim, rng);
  a2.bias = random_tensor(rng, a2.bias.shape(), -0.1, 0.1);
  layers.emplace_back(std::move(a2));
  return num::Network(in_shape, std::move(layers));
}

num::Network linear_network(const num::Tensor& weight, const num::Tensor& bias) {
  std::vector<num::Layer> layers;
  layers.emplace_back(num::AffineLayer{weight, bias});
  return num::Network({weight.shape()[1]}, std::move(layers));
}

}  // namespace uaplab::testkit

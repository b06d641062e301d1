#include "uaplab/agentkit/dqn.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "uaplab/agentkit/evaluate.hpp"
#include "uaplab/envlab/environment.hpp"
#include "uaplab/numcore/random.hpp"

namespace uaplab::agent {
namespace {

using num::Tensor;

// Fixed-capacity ring buffer of transitions; states stored as float to keep
// the footprint small. Preprocessed pixels are multiples of 1/1020, which
// float keeps to within 3e-8.
class ReplayBuffer {
 public:
  ReplayBuffer(std::size_t capacity, std::size_t state_size)
      : capacity_(capacity),
        state_size_(state_size),
        states_(capacity * state_size),
        next_states_(capacity * state_size),
        actions_(capacity),
        rewards_(capacity) {}

  void add(const Tensor& s, std::size_t action, double reward, const Tensor& next) {
    const std::size_t slot = head_;
    std::copy(s.data().begin(), s.data().end(), states_.begin() + slot * state_size_);
    std::copy(next.data().begin(), next.data().end(), next_states_.begin() + slot * state_size_);
    actions_[slot] = action;
    rewards_[slot] = reward;
    head_ = (head_ + 1) % capacity_;
    size_ = std::min(size_ + 1, capacity_);
  }

  std::size_t size() const { return size_; }

  void load(std::size_t i, Tensor& s, Tensor& next) const {
    const auto* src = states_.data() + i * state_size_;
    const auto* nsrc = next_states_.data() + i * state_size_;
    for (std::size_t k = 0; k < state_size_; ++k) {
      s[k] = src[k];
      next[k] = nsrc[k];
    }
  }
  std::size_t action(std::size_t i) const { return actions_[i]; }
  double reward(std::size_t i) const { return rewards_[i]; }

 private:
  std::size_t capacity_;
  std::size_t state_size_;
  std::vector<float> states_;
  std::vector<float> next_states_;
  std::vector<std::size_t> actions_;
  std::vector<double> rewards_;
  std::size_t head_ = 0;
  std::size_t size_ = 0;
};

class Adam {
 public:
  Adam(const num::Network& net, double lr) : lr_(lr), m_(net.zero_grads()), v_(net.zero_grads()) {}

  void step(num::Network& net, const num::ParamGrads& grads) {
    ++t_;
    const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(t_));
    for (std::size_t i = 0; i < grads.size(); ++i) {
      num::Layer& layer = net.layer(i);
      Tensor* w = nullptr;
      Tensor* b = nullptr;
      if (auto* a = std::get_if<num::AffineLayer>(&layer)) {
        w = &a->weight;
        b = &a->bias;
      } else if (auto* c = std::get_if<num::ConvLayer>(&layer)) {
        w = &c->weight;
        b = &c->bias;
      } else {
        continue;
      }
      update(*w, grads[i].weight, m_[i].weight, v_[i].weight, c1, c2);
      update(*b, grads[i].bias, m_[i].bias, v_[i].bias, c1, c2);
    }
  }

 private:
  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  static constexpr double kEps = 1e-8;

  void update(Tensor& p, const Tensor& g, Tensor& m, Tensor& v, double c1, double c2) const {
    for (std::size_t k = 0; k < p.size(); ++k) {
      m[k] = kBeta1 * m[k] + (1.0 - kBeta1) * g[k];
      v[k] = kBeta2 * v[k] + (1.0 - kBeta2) * g[k] * g[k];
      p[k] -= lr_ * (m[k] / c1) / (std::sqrt(v[k] / c2) + kEps);
    }
  }

  double lr_;
  num::ParamGrads m_;
  num::ParamGrads v_;
  std::size_t t_ = 0;
};

void scale_grads(num::ParamGrads& grads, double factor) {
  for (auto& g : grads) {
    g.weight *= factor;
    g.bias *= factor;
  }
}

void zero(num::ParamGrads& grads) { scale_grads(grads, 0.0); }

}  // namespace

void TrainConfig::validate() const {
  const auto fail = [](const std::string& what) {
    throw std::invalid_argument("invalid training config: " + what);
  };
  if (!(discount > 0.0 && discount < 1.0)) fail("discount must be in (0, 1)");
  if (!(learning_rate > 0.0)) fail("learning_rate must be positive");
  if (replay_capacity == 0 || batch_size == 0 || target_sync_interval == 0 ||
      train_interval == 0 || eval_episodes == 0) {
    fail("capacities, intervals and batch size must be positive");
  }
  if (!(epsilon_start >= 0.0 && epsilon_start <= 1.0 && epsilon_end >= 0.0 &&
        epsilon_end <= epsilon_start)) {
    fail("epsilon schedule must satisfy 0 <= end <= start <= 1");
  }
}

num::Network make_q_network(const env::EnvSpec& spec, std::uint64_t seed) {
  spec.validate();
  num::Rng rng(seed);
  constexpr std::size_t kFilters = 8;
  constexpr std::size_t kKernel = 4;
  constexpr std::size_t kStride = 2;
  constexpr std::size_t kHidden = 64;
  num::ConvLayer conv = num::random_conv(spec.frame_skip, kFilters, kKernel, kStride, rng);
  const num::Shape conv_out = num::conv_output_shape(conv, spec.state_shape());
  const std::size_t flat = num::element_count(conv_out);
  std::vector<num::Layer> layers;
  layers.emplace_back(std::move(conv));
  layers.emplace_back(num::ReluLayer{});
  layers.emplace_back(num::FlattenLayer{});
  layers.emplace_back(num::random_affine(flat, kHidden, rng));
  layers.emplace_back(num::ReluLayer{});
  layers.emplace_back(num::random_affine(kHidden, spec.num_actions(), rng));
  return num::Network(spec.state_shape(), std::move(layers));
}

AgentCheckpoint train_dqn(const env::EnvSpec& spec, const TrainConfig& cfg,
                          const TrainProgress& progress, std::size_t progress_interval) {
  cfg.validate();
  spec.validate();
  num::Rng rng(cfg.seed);
  num::Network online = make_q_network(spec, cfg.seed);
  num::Network target = online;

  const std::size_t state_size = num::element_count(spec.state_shape());
  const std::size_t actions = spec.num_actions();
  ReplayBuffer replay(cfg.replay_capacity, state_size);
  Adam adam(online, cfg.learning_rate);
  num::ParamGrads grads = online.zero_grads();
  Tensor s_batch(spec.state_shape());
  Tensor next_batch(spec.state_shape());

  env::Environment environment(spec);
  Tensor state = cfg.total_steps > 0 ? environment.reset(rng()) : Tensor();
  double episode_return = 0.0;
  double recent_return = 0.0;
  std::size_t finished = 0;

  for (std::size_t step = 1; step <= cfg.total_steps; ++step) {
    const double frac =
        std::min(1.0, static_cast<double>(step) / static_cast<double>(cfg.epsilon_decay_steps));
    const double epsilon = cfg.epsilon_start + frac * (cfg.epsilon_end - cfg.epsilon_start);
    const std::size_t action =
        num::uniform01(rng) < epsilon ? num::uniform_index(rng, actions) : act_greedy(online, state);

    env::StepResult result = environment.step(action);
    // Horizon ends are time limits, not terminal states: always bootstrap.
    replay.add(state, action, result.reward, result.state);
    episode_return += result.reward;
    if (result.done) {
      ++finished;
      recent_return = finished == 1 ? episode_return : 0.9 * recent_return + 0.1 * episode_return;
      episode_return = 0.0;
      state = environment.reset(rng());
    } else {
      state = std::move(result.state);
    }

    if (replay.size() >= std::max(cfg.warmup_steps, cfg.batch_size) &&
        step % cfg.train_interval == 0) {
      zero(grads);
      for (std::size_t b = 0; b < cfg.batch_size; ++b) {
        const std::size_t i = num::uniform_index(rng, replay.size());
        replay.load(i, s_batch, next_batch);
        const Tensor next_online = online.forward(next_batch);
        const Tensor next_target = target.forward(next_batch);
        const double bootstrap = next_target[argmax(next_online.data())];
        const double y = replay.reward(i) + cfg.discount * bootstrap;
        const num::Activations acts = online.forward_trace(s_batch);
        const double td = acts.output()[replay.action(i)] - y;
        if (!std::isfinite(td)) {
          throw num::NumericError("DQN loss diverged at step " + std::to_string(step));
        }
        Tensor out_grad({actions});
        out_grad[replay.action(i)] = std::clamp(td, -1.0, 1.0) / static_cast<double>(cfg.batch_size);
        online.accumulate_param_grads(acts, out_grad, grads);
      }
      adam.step(online, grads);
    }
    if (step % cfg.target_sync_interval == 0) {
      if (!online.parameters_finite()) {
        throw num::NumericError("DQN parameters diverged at step " + std::to_string(step));
      }
      target = online;
    }
    if (progress && progress_interval > 0 && step % progress_interval == 0) {
      progress(step, recent_return);
    }
  }
  if (!online.parameters_finite()) throw num::NumericError("DQN parameters diverged");

  AgentCheckpoint agent;
  agent.spec = spec;
  agent.training_seed = cfg.seed;
  agent.eval_seed_begin = cfg.eval_seed_begin;
  agent.eval_episodes = cfg.eval_episodes;
  const auto seeds = seed_range(cfg.eval_seed_begin, cfg.eval_episodes);
  agent.clean_return = evaluate(online, spec, seeds.size(), seeds).mean_return;
  agent.q = std::move(online);
  return agent;
}

}  // namespace uaplab::agent

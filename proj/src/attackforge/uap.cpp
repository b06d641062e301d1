#include "uaplab/attackforge/uap.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "uaplab/agentkit/policy.hpp"
#include "uaplab/numcore/random.hpp"

namespace uaplab::attack {

void AttackConfig::validate() const {
  const auto fail = [](const std::string& what) {
    throw std::invalid_argument("invalid attack config: " + what);
  };
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) fail("epsilon must be positive");
  if (!(target_fooling_rate > 0.0 && target_fooling_rate <= 1.0)) {
    fail("target fooling rate must be in (0, 1]");
  }
  if (deepfool_max_inner == 0) fail("deepfool_max_inner must be >= 1");
  if (k == 0) fail("k must be >= 1");
  if (!(overshoot > 0.0) || !std::isfinite(overshoot)) fail("overshoot must be positive");
  if (alpha && !(*alpha > 0.0 && std::isfinite(*alpha))) fail("alpha must be positive");
}

namespace {

num::Tensor perturbed(const num::Tensor& s, const num::Tensor& r, bool clip) {
  return clip ? perturb_state(s, r) : s + r;
}

std::vector<std::size_t> clean_actions(const num::Network& q, std::span<const num::Tensor> states) {
  std::vector<std::size_t> out;
  out.reserve(states.size());
  for (const auto& s : states) out.push_back(agent::argmax(q.forward(s).data()));
  return out;
}

double rate(const num::Network& q, std::span<const num::Tensor> states,
            const std::vector<std::size_t>& clean, const num::Tensor& r, bool clip) {
  std::size_t fooled = 0;
  for (std::size_t i = 0; i < states.size(); ++i) {
    if (agent::argmax(q.forward(perturbed(states[i], r, clip)).data()) != clean[i]) ++fooled;
  }
  return static_cast<double>(fooled) / static_cast<double>(states.size());
}

UapResult run_uap(const num::Network& q, std::span<const num::Tensor> states,
                  const AttackConfig& cfg, Constraint constraint, const Perturbation* warm_start) {
  cfg.validate();
  if (states.empty()) throw std::invalid_argument("universal attack needs a non-empty state set");
  const PerturbationMode mode =
      constraint == Constraint::SlotTied ? PerturbationMode::SlotTied : PerturbationMode::PerSlot;
  Perturbation r(mode, states.front().shape(), cfg.epsilon);
  if (warm_start != nullptr) {
    if (warm_start->mode() != mode || warm_start->state_shape() != r.state_shape() ||
        warm_start->epsilon() != cfg.epsilon) {
      throw std::invalid_argument("warm start does not match the attack's mode, shape or epsilon");
    }
    warm_start->check_bound();
    r = *warm_start;
  }

  const std::vector<std::size_t> clean = clean_actions(q, states);
  const DeepFoolOptions df{cfg.deepfool_max_inner, cfg.overshoot, constraint, cfg.clip_pixels};
  std::vector<std::size_t> order(states.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  num::Rng rng(cfg.seed);

  UapResult result;
  double delta = 0.0;
  Perturbation best = r;
  double best_delta = -1.0;
  num::Tensor r_state = r.as_state();
  while (delta < cfg.target_fooling_rate && result.passes < cfg.max_iterations) {
    if (cfg.shuffle) {
      for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[num::uniform_index(rng, i)]);
    }
    for (std::size_t idx : order) {
      const num::Tensor& s = states[idx];
      if (agent::argmax(q.forward(perturbed(s, r_state, cfg.clip_pixels)).data()) != clean[idx]) {
        continue;
      }
      const DeepFoolResult found = deepfool(q, s, r_state, df);
      if (!found.success) {
        ++result.deepfool_failures;
        continue;
      }
      if (mode == PerturbationMode::SlotTied) {
        const auto frame = found.update.data().subspan(0, r.frame_size());
        accumulate_and_clamp(r, num::Tensor(r.storage().shape(), {frame.begin(), frame.end()}));
      } else {
        accumulate_and_clamp(r, found.update);
      }
      r_state = r.as_state();
      ++result.updates;
    }
    ++result.passes;
    delta = rate(q, states, clean, r_state, cfg.clip_pixels);
    if (delta > best_delta) {
      best_delta = delta;
      best = r;
    }
  }
  if (result.passes == 0) {
    best_delta = rate(q, states, clean, r_state, cfg.clip_pixels);
    best = r;
  }
  best.check_bound();
  result.perturbation = std::move(best);
  result.fooling_rate = best_delta;
  result.reached_target = best_delta >= cfg.target_fooling_rate;
  return result;
}

}  // namespace

double fooling_rate(const num::Network& q, std::span<const num::Tensor> states,
                    const Perturbation& r, bool clip_pixels) {
  if (states.empty()) throw std::invalid_argument("fooling_rate needs a non-empty state set");
  return rate(q, states, clean_actions(q, states), r.as_state(), clip_pixels);
}

UapResult uap_s(const num::Network& q, std::span<const num::Tensor> states, const AttackConfig& cfg,
                const Perturbation* warm_start) {
  return run_uap(q, states, cfg, Constraint::PerSlot, warm_start);
}

UapResult uap_o(const num::Network& q, std::span<const num::Tensor> states, const AttackConfig& cfg,
                const Perturbation* warm_start) {
  return run_uap(q, states, cfg, Constraint::SlotTied, warm_start);
}

}  // namespace uaplab::attack

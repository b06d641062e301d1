#include "uaplab/attackforge/continuous.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "uaplab/agentkit/policy.hpp"

namespace uaplab::attack {
namespace {

num::Tensor shifted(const num::Tensor& s, const num::Tensor& r, const num::Tensor& total, double scale,
                    bool clip) {
  num::Tensor x(s.shape());
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double v = s[i] + r[i] + scale * total[i];
    x[i] = clip ? std::clamp(v, 0.0, 1.0) : v;
  }
  return x;
}

}  // namespace

double GreedyValueModel::value(const num::Tensor& s) const {
  const num::Tensor out = q_.forward(s);
  return out[agent::argmax(out.data())];
}

num::Tensor GreedyValueModel::gradient(const num::Tensor& s) const {
  const num::Activations acts = q_.forward_trace(s);
  num::Tensor onehot({q_.out_dim()});
  onehot[agent::argmax(acts.output().data())] = 1.0;
  return q_.backward_input(acts, onehot);
}

double default_alpha(const ValueModel& v, std::span<const num::Tensor> states) {
  if (states.empty()) throw std::invalid_argument("default_alpha needs states");
  double lo = v.value(states.front());
  double hi = lo;
  for (const auto& s : states) {
    const double x = v.value(s);
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }
  if (!(hi > lo)) {
    throw std::invalid_argument("default_alpha: V is constant over the states; pass alpha explicitly");
  }
  return 0.01 * (hi - lo);
}

bool value_fooled(const ValueModel& v, const num::Tensor& s, const num::Tensor& r, double alpha,
                  bool clip_pixels) {
  const num::Tensor x = clip_pixels ? perturb_state(s, r) : s + r;
  return v.value(x) + alpha < v.value(s);
}

double value_fooling_rate(const ValueModel& v, std::span<const num::Tensor> states,
                          const num::Tensor& r, double alpha, bool clip_pixels) {
  if (states.empty()) throw std::invalid_argument("value_fooling_rate needs states");
  std::size_t fooled = 0;
  for (const auto& s : states) fooled += value_fooled(v, s, r, alpha, clip_pixels) ? 1 : 0;
  return static_cast<double>(fooled) / static_cast<double>(states.size());
}

DeepFoolResult value_deepfool(const ValueModel& v, const num::Tensor& s, const num::Tensor& r,
                              double alpha, const DeepFoolOptions& options) {
  num::require_same_shape(s, r, "value_deepfool");
  if (options.max_inner == 0) throw std::invalid_argument("value_deepfool needs max_inner >= 1");
  const double target = v.value(s) - alpha;
  const double scale = 1.0 + options.overshoot;

  DeepFoolResult result;
  num::Tensor total(s.shape());
  num::Tensor x = shifted(s, r, total, 1.0, options.clip_pixels);
  num::Tensor overshot = x;
  for (std::size_t i = 0; i < options.max_inner; ++i) {
    if (v.value(overshot) < target) break;
    const double vx = v.value(x);
    const num::Tensor g = v.gradient(x);
    const double sq = g.squared_norm();
    if (!(sq > 0.0)) return result;
    total += (-(vx - target) / sq) * g;
    if (!total.all_finite()) return result;
    ++result.iterations;
    x = shifted(s, r, total, 1.0, options.clip_pixels);
    overshot = shifted(s, r, total, scale, options.clip_pixels);
  }
  result.success = v.value(overshot) < target;
  result.update = scale * total;
  return result;
}

ContinuousUapResult uap_continuous(const ValueModel& v, std::span<const num::Tensor> states,
                                   const AttackConfig& cfg) {
  cfg.validate();
  if (states.empty()) throw std::invalid_argument("uap_continuous needs a non-empty state set");
  ContinuousUapResult out;
  out.alpha = cfg.alpha ? *cfg.alpha : default_alpha(v, states);
  const DeepFoolOptions df{cfg.deepfool_max_inner, cfg.overshoot, Constraint::PerSlot, cfg.clip_pixels};

  Perturbation r(PerturbationMode::PerSlot, states.front().shape(), cfg.epsilon);
  UapResult& res = out.uap;
  double delta = 0.0;
  Perturbation best = r;
  double best_delta = -1.0;
  while (delta < cfg.target_fooling_rate && res.passes < cfg.max_iterations) {
    for (const auto& s : states) {
      if (value_fooled(v, s, r.storage(), out.alpha, cfg.clip_pixels)) continue;
      const DeepFoolResult found = value_deepfool(v, s, r.storage(), out.alpha, df);
      if (!found.success) {
        ++res.deepfool_failures;
        continue;
      }
      accumulate_and_clamp(r, found.update);
      ++res.updates;
    }
    ++res.passes;
    delta = value_fooling_rate(v, states, r.storage(), out.alpha, cfg.clip_pixels);
    if (delta > best_delta) {
      best_delta = delta;
      best = r;
    }
  }
  if (res.passes == 0) best_delta = value_fooling_rate(v, states, r.storage(), out.alpha, cfg.clip_pixels);
  best.check_bound();
  res.perturbation = std::move(best);
  res.fooling_rate = best_delta;
  res.reached_target = best_delta >= cfg.target_fooling_rate;
  return out;
}

}  // namespace uaplab::attack

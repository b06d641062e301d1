#include "uaplab/attackforge/deepfool.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "uaplab/agentkit/policy.hpp"

namespace uaplab::attack {
namespace {

num::Tensor candidate(const num::Tensor& s, const num::Tensor& r, const num::Tensor& total,
                      double scale, bool clip) {
  num::Tensor x(s.shape());
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double v = s[i] + r[i] + scale * total[i];
    x[i] = clip ? std::clamp(v, 0.0, 1.0) : v;
  }
  return x;
}

// Inert entries: at the lower bound and pointing down, or at the upper bound
// and pointing up. Q' < 0 always, so the step moves along +w.
void mask_inert(num::Tensor& w, const num::Tensor& x) {
  num::require_same_shape(w, x, "deepfool box mask");
  for (std::size_t i = 0; i < w.size(); ++i) {
    if ((x[i] <= 0.0 && w[i] < 0.0) || (x[i] >= 1.0 && w[i] > 0.0)) w[i] = 0.0;
  }
}

}  // namespace

num::Tensor project_slot_tied(const num::Tensor& gradient_gap, double value_gap) {
  if (gradient_gap.rank() == 0 || gradient_gap.size() == 0) {
    throw num::ShapeError("project_slot_tied needs a non-empty gradient");
  }
  const std::size_t slots = gradient_gap.shape().front();
  const std::size_t frame = gradient_gap.size() / slots;
  const double sq = gradient_gap.squared_norm();
  if (!(sq > 0.0)) throw std::domain_error("project_slot_tied: zero gradient gap");
  const double scale = std::abs(value_gap) / (static_cast<double>(slots) * sq);
  num::Tensor out(gradient_gap.shape());
  for (std::size_t p = 0; p < frame; ++p) {
    double sum = 0.0;
    for (std::size_t k = 0; k < slots; ++k) sum += gradient_gap[k * frame + p];
    const double v = scale * sum;
    for (std::size_t k = 0; k < slots; ++k) out[k * frame + p] = v;
  }
  return out;
}

std::optional<DeepFoolStep> deepfool_step(const num::Jacobian& jac, std::size_t chosen,
                                          Constraint constraint, const num::Tensor* box_point) {
  const std::size_t actions = jac.outputs.size();
  if (chosen >= actions || jac.rows.size() != actions) {
    throw std::invalid_argument("deepfool_step: action index or Jacobian size mismatch");
  }
  std::optional<DeepFoolStep> best;
  double best_dist = std::numeric_limits<double>::infinity();
  double best_sq = 0.0;
  for (std::size_t l = 0; l < actions; ++l) {
    if (l == chosen) continue;
    num::Tensor w = jac.rows[l] - jac.rows[chosen];
    if (box_point != nullptr) mask_inert(w, *box_point);
    const double sq = w.squared_norm();
    if (!(sq > 0.0)) continue;
    const double gap = jac.outputs[l] - jac.outputs[chosen];
    const double dist = std::abs(gap) / std::sqrt(sq);
    if (dist < best_dist) {
      best_dist = dist;
      best_sq = sq;
      best = DeepFoolStep{l, gap, std::move(w), {}};
    }
  }
  if (!best) return std::nullopt;
  if (constraint == Constraint::SlotTied) {
    best->update = project_slot_tied(best->gradient_gap, best->value_gap);
  } else {
    best->update = (std::abs(best->value_gap) / best_sq) * best->gradient_gap;
  }
  return best;
}

DeepFoolResult deepfool(const num::Network& q, const num::Tensor& s, const num::Tensor& r,
                        const DeepFoolOptions& options) {
  num::require_same_shape(s, r, "deepfool");
  if (options.max_inner == 0) throw std::invalid_argument("deepfool needs max_inner >= 1");
  const std::size_t chosen = agent::argmax(q.forward(s).data());
  const double scale = 1.0 + options.overshoot;

  // Steps linearize at s + r + total; success is judged with the overshoot.
  DeepFoolResult result;
  num::Tensor total(s.shape());
  num::Tensor x = candidate(s, r, total, 1.0, options.clip_pixels);
  num::Tensor overshot = x;
  for (std::size_t i = 0; i < options.max_inner; ++i) {
    if (agent::argmax(q.forward(overshot).data()) != chosen) break;
    const num::Jacobian jac = num::output_jacobian(q, x);
    const auto step = deepfool_step(jac, chosen, options.constraint, options.clip_pixels ? &x : nullptr);
    if (!step) return result;
    total += step->update;
    if (!total.all_finite()) return result;
    ++result.iterations;
    x = candidate(s, r, total, 1.0, options.clip_pixels);
    overshot = candidate(s, r, total, scale, options.clip_pixels);
  }
  result.success = agent::argmax(q.forward(overshot).data()) != chosen;
  result.update = scale * total;
  return result;
}

}  // namespace uaplab::attack

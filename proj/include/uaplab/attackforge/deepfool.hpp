#pragma once

#include <cstddef>
#include <optional>

#include "uaplab/numcore/network.hpp"

namespace uaplab::attack {

/// PerSlot updates are free in every slot; SlotTied updates repeat one frame
/// across all slots.
enum class Constraint { PerSlot, SlotTied };

/// One linearized step towards the closest decision boundary.
struct DeepFoolStep {
  std::size_t closest = 0;  ///< alternative action whose boundary is nearest
  double value_gap = 0.0;   ///< Q(x, closest) - Q(x, chosen)
  num::Tensor gradient_gap; ///< grad Q(x, closest) - grad Q(x, chosen)
  num::Tensor update;
};

/// Computes the step from the outputs and Jacobian at the current point.
/// Returns nullopt when every alternative has a zero gradient gap. With
/// box_point set, gradient-gap entries that would push a coordinate of
/// box_point further past [0, 1] are zeroed first: clipping makes them inert.
std::optional<DeepFoolStep> deepfool_step(const num::Jacobian& jac, std::size_t chosen,
                                          Constraint constraint = Constraint::PerSlot,
                                          const num::Tensor* box_point = nullptr);

/// The minimal slot-tied update: every slot receives
/// |gap| / (N ||w||^2) * sum_k w_k, with w split into N slots along its first
/// dimension. Throws std::domain_error when ||w|| == 0.
num::Tensor project_slot_tied(const num::Tensor& gradient_gap, double value_gap);

struct DeepFoolOptions {
  std::size_t max_inner = 50;
  double overshoot = 0.02;
  Constraint constraint = Constraint::PerSlot;
  bool clip_pixels = true;  ///< evaluate candidates at clip(x, 0, 1)
};

struct DeepFoolResult {
  bool success = false;
  std::size_t iterations = 0;
  num::Tensor update;  ///< (1 + overshoot) times the accumulated steps
};

/// Searches for an extra update to s + r that changes the greedy action of q
/// away from its action at s.
DeepFoolResult deepfool(const num::Network& q, const num::Tensor& s, const num::Tensor& r,
                        const DeepFoolOptions& options = {});

}  // namespace uaplab::attack

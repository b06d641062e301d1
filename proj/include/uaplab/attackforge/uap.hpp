#pragma once

#include <cstdint>
#include <optional>
#include <span>

#include "uaplab/attackforge/deepfool.hpp"
#include "uaplab/attackforge/perturbation.hpp"
#include "uaplab/numcore/network.hpp"

namespace uaplab::attack {

struct AttackConfig {
  double epsilon = 0.05;
  double target_fooling_rate = 0.95;  ///< delta_max
  std::size_t max_iterations = 10;     ///< it_max; 0 skips the loop entirely
  std::size_t deepfool_max_inner = 50;
  double overshoot = 0.02;
  std::size_t k = 16;                  ///< states averaged by OSFW and OSFW(U)
  std::optional<double> alpha;         ///< value-drop margin; default from the data
  std::uint64_t seed = 0;
  bool shuffle = false;                ///< visit D in a seeded random order each pass
  bool clip_pixels = true;             ///< perturbed states are clipped to [0, 1]

  void validate() const;
};

struct UapResult {
  Perturbation perturbation;     ///< best perturbation seen
  double fooling_rate = 0.0;     ///< of the returned perturbation
  std::size_t passes = 0;
  std::size_t updates = 0;       ///< accepted DeepFool updates
  std::size_t deepfool_failures = 0;
  bool reached_target = false;
  /// Set when the loop stopped at it_max with the target not reached.
  bool warning() const { return !reached_target; }
};

/// Fraction of states whose greedy action changes under the perturbation.
double fooling_rate(const num::Network& q, std::span<const num::Tensor> states,
                    const Perturbation& r, bool clip_pixels = true);

/// Per-slot universal perturbation. A warm start, when given, must be a
/// per-slot perturbation with the config's epsilon.
UapResult uap_s(const num::Network& q, std::span<const num::Tensor> states, const AttackConfig& cfg,
                const Perturbation* warm_start = nullptr);

/// Slot-tied universal perturbation.
UapResult uap_o(const num::Network& q, std::span<const num::Tensor> states, const AttackConfig& cfg,
                const Perturbation* warm_start = nullptr);

}  // namespace uaplab::attack

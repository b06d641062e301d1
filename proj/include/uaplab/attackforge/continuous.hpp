#pragma once

#include <span>

#include "uaplab/attackforge/deepfool.hpp"
#include "uaplab/attackforge/uap.hpp"
#include "uaplab/numcore/network.hpp"

namespace uaplab::attack {

/// Differentiable state-value oracle V(s).
class ValueModel {
 public:
  virtual ~ValueModel() = default;
  virtual const num::Shape& state_shape() const = 0;
  virtual double value(const num::Tensor& s) const = 0;
  virtual num::Tensor gradient(const num::Tensor& s) const = 0;
};

class NetworkValueModel final : public ValueModel {
 public:
  explicit NetworkValueModel(num::ValueNetwork v) : v_(std::move(v)) {}
  const num::Shape& state_shape() const override { return v_.in_shape(); }
  double value(const num::Tensor& s) const override { return v_.value(s); }
  num::Tensor gradient(const num::Tensor& s) const override { return v_.gradient(s); }

 private:
  num::ValueNetwork v_;
};

/// V(s) = max_a Q(s, a), with the gradient of the maximizing output. Lets the
/// value attack run against a discrete-action agent.
class GreedyValueModel final : public ValueModel {
 public:
  explicit GreedyValueModel(const num::Network& q) : q_(q) {}
  const num::Shape& state_shape() const override { return q_.in_shape(); }
  double value(const num::Tensor& s) const override;
  num::Tensor gradient(const num::Tensor& s) const override;

 private:
  const num::Network& q_;
};

/// 1% of the spread of V over the states. Throws when V is constant there.
double default_alpha(const ValueModel& v, std::span<const num::Tensor> states);

/// True when V(s + r) + alpha < V(s).
bool value_fooled(const ValueModel& v, const num::Tensor& s, const num::Tensor& r, double alpha,
                  bool clip_pixels = false);

double value_fooling_rate(const ValueModel& v, std::span<const num::Tensor> states,
                          const num::Tensor& r, double alpha, bool clip_pixels = false);

/// Linearized search for an extra update that drops V(s + r) below V(s) - alpha.
DeepFoolResult value_deepfool(const ValueModel& v, const num::Tensor& s, const num::Tensor& r,
                              double alpha, const DeepFoolOptions& options);

struct ContinuousUapResult {
  UapResult uap;
  double alpha = 0.0;
};

/// Universal value-drop perturbation. Uses cfg.alpha or default_alpha.
ContinuousUapResult uap_continuous(const ValueModel& v, std::span<const num::Tensor> states,
                                   const AttackConfig& cfg);

}  // namespace uaplab::attack

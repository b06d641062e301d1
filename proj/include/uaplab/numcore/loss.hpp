#pragma once

#include <cstddef>

#include "uaplab/numcore/network.hpp"

namespace uaplab::num {

enum class LossKind {
  NegLogSoftmax,      ///< -log softmax(out)[action]
  ActionValueMargin,  ///< out[action] - max_{b != action} out[b]
  ValueScalar,        ///< out[0], for single-output value networks
  SquaredError,       ///< ||out - target||^2
};

struct Loss {
  LossKind kind = LossKind::NegLogSoftmax;
  std::size_t action = 0;
  Tensor target;

  static Loss neg_log_softmax(std::size_t action) { return {LossKind::NegLogSoftmax, action, {}}; }
  static Loss margin(std::size_t action) { return {LossKind::ActionValueMargin, action, {}}; }
  static Loss value() { return {LossKind::ValueScalar, 0, {}}; }
  static Loss squared_error(Tensor target) {
    return {LossKind::SquaredError, 0, std::move(target)};
  }
};

struct LossValue {
  double value = 0.0;
  Tensor output_grad;
};

LossValue evaluate_loss(const Loss& loss, const Tensor& output);

/// Gradient of the scalar loss with respect to the network input.
Tensor grad_input(const Network& net, const Tensor& s, const Loss& loss);

/// Gradient of the scalar loss with respect to every parameter.
ParamGrads grad_params(const Network& net, const Tensor& s, const Loss& loss);

/// Max-subtracted softmax over a rank-1 tensor.
Tensor softmax(const Tensor& v);

}  // namespace uaplab::num

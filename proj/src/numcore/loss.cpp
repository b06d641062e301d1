#include "uaplab/numcore/loss.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace uaplab::num {

Tensor softmax(const Tensor& v) {
  if (v.rank() != 1 || v.empty()) {
    throw ShapeError("softmax expects a non-empty vector, got " + to_string(v.shape()));
  }
  const double peak = *std::max_element(v.data().begin(), v.data().end());
  Tensor out(v.shape());
  double total = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out[i] = std::exp(v[i] - peak);
    total += out[i];
  }
  for (double& p : out.data()) p /= total;
  require_finite(out, "softmax");
  return out;
}

LossValue evaluate_loss(const Loss& loss, const Tensor& output) {
  if (output.rank() != 1) throw ShapeError("loss expects a vector output");
  const std::size_t n = output.size();
  const auto require_action = [&] {
    if (loss.action >= n) {
      throw std::invalid_argument("loss target action " + std::to_string(loss.action) +
                                  " out of range for " + std::to_string(n) + " outputs");
    }
  };
  LossValue result{0.0, Tensor(output.shape())};
  switch (loss.kind) {
    case LossKind::NegLogSoftmax: {
      require_action();
      const Tensor p = softmax(output);
      result.value = -std::log(p[loss.action]);
      for (std::size_t i = 0; i < n; ++i) result.output_grad[i] = p[i];
      result.output_grad[loss.action] -= 1.0;
      break;
    }
    case LossKind::ActionValueMargin: {
      require_action();
      if (n < 2) throw std::invalid_argument("margin loss needs at least two outputs");
      std::size_t rival = loss.action == 0 ? 1 : 0;
      for (std::size_t i = 0; i < n; ++i) {
        if (i != loss.action && output[i] > output[rival]) rival = i;
      }
      result.value = output[loss.action] - output[rival];
      result.output_grad[loss.action] = 1.0;
      result.output_grad[rival] = -1.0;
      break;
    }
    case LossKind::ValueScalar:
      if (n != 1) throw std::invalid_argument("value loss needs exactly one output");
      result.value = output[0];
      result.output_grad[0] = 1.0;
      break;
    case LossKind::SquaredError: {
      require_same_shape(output, loss.target, "squared error target");
      for (std::size_t i = 0; i < n; ++i) {
        const double d = output[i] - loss.target[i];
        result.value += d * d;
        result.output_grad[i] = 2.0 * d;
      }
      break;
    }
  }
  if (!std::isfinite(result.value)) throw NumericError("loss evaluated to a non-finite value");
  return result;
}

Tensor grad_input(const Network& net, const Tensor& s, const Loss& loss) {
  const Activations acts = net.forward_trace(s);
  const LossValue lv = evaluate_loss(loss, acts.output());
  return net.backward_input(acts, lv.output_grad);
}

ParamGrads grad_params(const Network& net, const Tensor& s, const Loss& loss) {
  const Activations acts = net.forward_trace(s);
  const LossValue lv = evaluate_loss(loss, acts.output());
  return net.backward_params(acts, lv.output_grad);
}

}  // namespace uaplab::num

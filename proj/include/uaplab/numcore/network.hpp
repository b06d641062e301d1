#pragma once

#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "uaplab/numcore/tensor.hpp"

namespace uaplab::num {

enum class LayerKind : std::uint8_t { Affine = 1, Conv = 2, Relu = 3, Flatten = 4 };

/// y = W x + b, W is (out, in), x is rank-1.
struct AffineLayer {
  Tensor weight;
  Tensor bias;
};

/// Valid (unpadded) 2-D convolution over a (C, H, W) input.
/// weight is (out_channels, in_channels, kernel, kernel).
struct ConvLayer {
  Tensor weight;
  Tensor bias;
  std::size_t stride = 1;
};

struct ReluLayer {};
struct FlattenLayer {};

using Layer = std::variant<AffineLayer, ConvLayer, ReluLayer, FlattenLayer>;

LayerKind kind_of(const Layer& layer);

/// Parameter gradients, one entry per layer. Parameter-free layers carry
/// empty tensors.
struct LayerGrad {
  Tensor weight;
  Tensor bias;
};
using ParamGrads = std::vector<LayerGrad>;

/// Intermediate activations of one forward pass: inputs[i] is the input to
/// layer i, inputs.back() is the network output.
struct Activations {
  std::vector<Tensor> inputs;
  const Tensor& output() const { return inputs.back(); }
};

/// Small feed-forward network over {affine, conv, relu, flatten}. Immutable
/// once built unless a caller holds a private copy for training.
class Network {
 public:
  Network() = default;
  Network(Shape in_shape, std::vector<Layer> layers);

  const Shape& in_shape() const { return in_shape_; }
  std::size_t out_dim() const { return out_dim_; }
  const std::vector<Layer>& layers() const { return layers_; }

  /// Mutable parameter access for optimizers. Layer structure cannot change.
  Layer& layer(std::size_t i) { return layers_[i]; }

  Tensor forward(const Tensor& s) const;
  Activations forward_trace(const Tensor& s) const;

  /// Vector-Jacobian product with respect to the input.
  Tensor backward_input(const Activations& acts, const Tensor& out_grad) const;

  /// Vector-Jacobian product with respect to every parameter. When
  /// input_grad is non-null it also receives the input gradient.
  ParamGrads backward_params(const Activations& acts, const Tensor& out_grad,
                             Tensor* input_grad = nullptr) const;

  /// Adds this sample's parameter gradients into an existing buffer without
  /// computing the input gradient. Used by batched training.
  void accumulate_param_grads(const Activations& acts, const Tensor& out_grad,
                              ParamGrads& into) const;

  /// Zeroed gradient buffers matching this network's parameters.
  ParamGrads zero_grads() const;

  std::size_t parameter_count() const;
  bool parameters_finite() const;

  friend bool operator==(const Network& a, const Network& b);

 private:
  void check_input(const Tensor& s) const;

  Shape in_shape_;
  std::vector<Layer> layers_;
  std::size_t out_dim_ = 0;
};

bool operator==(const AffineLayer& a, const AffineLayer& b);
bool operator==(const ConvLayer& a, const ConvLayer& b);
inline bool operator==(const ReluLayer&, const ReluLayer&) { return true; }
inline bool operator==(const FlattenLayer&, const FlattenLayer&) { return true; }

/// Network whose single output is a state value V(s).
class ValueNetwork {
 public:
  explicit ValueNetwork(Network net);
  const Network& network() const { return net_; }
  const Shape& in_shape() const { return net_.in_shape(); }
  double value(const Tensor& s) const;
  Tensor gradient(const Tensor& s) const;

 private:
  Network net_;
};

/// Outputs and the per-output input gradients (rows of the Jacobian).
struct Jacobian {
  Tensor outputs;
  std::vector<Tensor> rows;
};
Jacobian output_jacobian(const Network& net, const Tensor& s);

/// Shape produced by a conv layer on the given input shape.
Shape conv_output_shape(const ConvLayer& conv, const Shape& in);

}  // namespace uaplab::num

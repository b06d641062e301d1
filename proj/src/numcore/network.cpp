#include "uaplab/numcore/network.hpp"

#include <algorithm>

namespace uaplab::num {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

Shape infer_output(const Layer& layer, const Shape& in, std::size_t index) {
  const std::string where = "layer " + std::to_string(index);
  return std::visit(
      Overloaded{
          [&](const AffineLayer& a) -> Shape {
            if (a.weight.rank() != 2 || a.bias.rank() != 1 ||
                a.bias.size() != a.weight.shape()[0]) {
              throw ShapeError(where + ": affine weight " + to_string(a.weight.shape()) +
                               " and bias " + to_string(a.bias.shape()) + " are inconsistent");
            }
            if (in.size() != 1 || in[0] != a.weight.shape()[1]) {
              throw ShapeError(where + ": affine expects input (" +
                               std::to_string(a.weight.shape()[1]) + "), got " + to_string(in));
            }
            return {a.weight.shape()[0]};
          },
          [&](const ConvLayer& c) -> Shape {
            if (c.weight.rank() != 4 || c.weight.shape()[2] != c.weight.shape()[3] ||
                c.bias.rank() != 1 || c.bias.size() != c.weight.shape()[0] || c.stride == 0) {
              throw ShapeError(where + ": conv weight " + to_string(c.weight.shape()) +
                               " and bias " + to_string(c.bias.shape()) + " are inconsistent");
            }
            if (in.size() != 3 || in[0] != c.weight.shape()[1]) {
              throw ShapeError(where + ": conv expects (" + std::to_string(c.weight.shape()[1]) +
                               ", H, W) input, got " + to_string(in));
            }
            return conv_output_shape(c, in);
          },
          [&](const ReluLayer&) -> Shape { return in; },
          [&](const FlattenLayer&) -> Shape { return {element_count(in)}; },
      },
      layer);
}

void affine_forward(const AffineLayer& a, const Tensor& x, Tensor& y) {
  const std::size_t out = a.weight.shape()[0];
  const std::size_t in = a.weight.shape()[1];
  const double* w = a.weight.data().data();
  const double* xs = x.data().data();
  double* ys = y.data().data();
  for (std::size_t o = 0; o < out; ++o) {
    const double* row = w + o * in;
    double acc = a.bias[o];
    for (std::size_t i = 0; i < in; ++i) acc += row[i] * xs[i];
    ys[o] = acc;
  }
}

void conv_forward(const ConvLayer& c, const Tensor& x, Tensor& y) {
  const std::size_t oc = c.weight.shape()[0];
  const std::size_t ic = c.weight.shape()[1];
  const std::size_t k = c.weight.shape()[2];
  const std::size_t ih = x.shape()[1];
  const std::size_t iw = x.shape()[2];
  const std::size_t oh = y.shape()[1];
  const std::size_t ow = y.shape()[2];
  const std::size_t st = c.stride;
  const double* w = c.weight.data().data();
  const double* xs = x.data().data();
  double* ys = y.data().data();
  for (std::size_t o = 0; o < oc; ++o) {
    for (std::size_t py = 0; py < oh; ++py) {
      for (std::size_t px = 0; px < ow; ++px) {
        double acc = c.bias[o];
        for (std::size_t ci = 0; ci < ic; ++ci) {
          const double* wk = w + ((o * ic + ci) * k) * k;
          const double* xc = xs + ci * ih * iw;
          for (std::size_t ky = 0; ky < k; ++ky) {
            const double* xrow = xc + (py * st + ky) * iw + px * st;
            const double* wrow = wk + ky * k;
            for (std::size_t kx = 0; kx < k; ++kx) acc += wrow[kx] * xrow[kx];
          }
        }
        ys[(o * oh + py) * ow + px] = acc;
      }
    }
  }
}

// Accumulates into gin (may be null) and into gw/gb (may be null).
void conv_backward(const ConvLayer& c, const Tensor& x, const Tensor& gout, Tensor* gin,
                   LayerGrad* grad) {
  const std::size_t oc = c.weight.shape()[0];
  const std::size_t ic = c.weight.shape()[1];
  const std::size_t k = c.weight.shape()[2];
  const std::size_t ih = x.shape()[1];
  const std::size_t iw = x.shape()[2];
  const std::size_t oh = gout.shape()[1];
  const std::size_t ow = gout.shape()[2];
  const std::size_t st = c.stride;
  const double* w = c.weight.data().data();
  const double* xs = x.data().data();
  const double* go = gout.data().data();
  double* gi = gin ? gin->data().data() : nullptr;
  double* gw = grad ? grad->weight.data().data() : nullptr;
  double* gb = grad ? grad->bias.data().data() : nullptr;
  for (std::size_t o = 0; o < oc; ++o) {
    for (std::size_t py = 0; py < oh; ++py) {
      for (std::size_t px = 0; px < ow; ++px) {
        const double g = go[(o * oh + py) * ow + px];
        if (g == 0.0) continue;
        if (gb) gb[o] += g;
        for (std::size_t ci = 0; ci < ic; ++ci) {
          const std::size_t wbase = ((o * ic + ci) * k) * k;
          const std::size_t xbase = ci * ih * iw + (py * st) * iw + px * st;
          for (std::size_t ky = 0; ky < k; ++ky) {
            for (std::size_t kx = 0; kx < k; ++kx) {
              const std::size_t wi = wbase + ky * k + kx;
              const std::size_t xi = xbase + ky * iw + kx;
              if (gi) gi[xi] += w[wi] * g;
              if (gw) gw[wi] += xs[xi] * g;
            }
          }
        }
      }
    }
  }
}

void affine_backward(const AffineLayer& a, const Tensor& x, const Tensor& gout, Tensor* gin,
                     LayerGrad* grad) {
  const std::size_t out = a.weight.shape()[0];
  const std::size_t in = a.weight.shape()[1];
  const double* w = a.weight.data().data();
  const double* xs = x.data().data();
  const double* go = gout.data().data();
  double* gi = gin ? gin->data().data() : nullptr;
  double* gw = grad ? grad->weight.data().data() : nullptr;
  double* gb = grad ? grad->bias.data().data() : nullptr;
  for (std::size_t o = 0; o < out; ++o) {
    const double g = go[o];
    if (g == 0.0) continue;
    if (gb) gb[o] += g;
    const double* row = w + o * in;
    if (gi) {
      for (std::size_t i = 0; i < in; ++i) gi[i] += row[i] * g;
    }
    if (gw) {
      double* grow = gw + o * in;
      for (std::size_t i = 0; i < in; ++i) grow[i] += xs[i] * g;
    }
  }
}

// Backward through layer i: returns the gradient with respect to its input.
Tensor layer_backward(const Layer& layer, const Tensor& x, const Tensor& y, const Tensor& gout,
                      LayerGrad* grad) {
  return std::visit(
      Overloaded{
          [&](const AffineLayer& a) {
            Tensor gin(x.shape());
            affine_backward(a, x, gout, &gin, grad);
            return gin;
          },
          [&](const ConvLayer& c) {
            Tensor gin(x.shape());
            conv_backward(c, x, gout, &gin, grad);
            return gin;
          },
          [&](const ReluLayer&) {
            Tensor gin(x.shape());
            for (std::size_t i = 0; i < x.size(); ++i) gin[i] = y[i] > 0.0 ? gout[i] : 0.0;
            return gin;
          },
          [&](const FlattenLayer&) { return gout.reshaped(x.shape()); },
      },
      layer);
}

}  // namespace

Shape conv_output_shape(const ConvLayer& conv, const Shape& in) {
  const std::size_t k = conv.weight.shape()[2];
  if (in.size() != 3 || in[1] < k || in[2] < k) {
    throw ShapeError("conv kernel " + std::to_string(k) + " does not fit input " + to_string(in));
  }
  return {conv.weight.shape()[0], (in[1] - k) / conv.stride + 1, (in[2] - k) / conv.stride + 1};
}

LayerKind kind_of(const Layer& layer) {
  return std::visit(Overloaded{
                        [](const AffineLayer&) { return LayerKind::Affine; },
                        [](const ConvLayer&) { return LayerKind::Conv; },
                        [](const ReluLayer&) { return LayerKind::Relu; },
                        [](const FlattenLayer&) { return LayerKind::Flatten; },
                    },
                    layer);
}

bool operator==(const AffineLayer& a, const AffineLayer& b) {
  return a.weight == b.weight && a.bias == b.bias;
}

bool operator==(const ConvLayer& a, const ConvLayer& b) {
  return a.weight == b.weight && a.bias == b.bias && a.stride == b.stride;
}

bool operator==(const Network& a, const Network& b) {
  return a.in_shape_ == b.in_shape_ && a.layers_ == b.layers_;
}

Network::Network(Shape in_shape, std::vector<Layer> layers)
    : in_shape_(std::move(in_shape)), layers_(std::move(layers)) {
  if (in_shape_.empty() || element_count(in_shape_) == 0) {
    throw ShapeError("network input shape " + to_string(in_shape_) + " is empty");
  }
  Shape shape = in_shape_;
  for (std::size_t i = 0; i < layers_.size(); ++i) shape = infer_output(layers_[i], shape, i);
  if (shape.size() != 1 || shape[0] == 0) {
    throw ShapeError("network output must be a non-empty vector, got " + to_string(shape));
  }
  out_dim_ = shape[0];
  if (!parameters_finite()) throw NumericError("network parameters are not finite");
}

void Network::check_input(const Tensor& s) const {
  if (s.shape() != in_shape_) {
    throw ShapeError("network input: expected shape " + to_string(in_shape_) + ", got " +
                     to_string(s.shape()));
  }
}

Activations Network::forward_trace(const Tensor& s) const {
  check_input(s);
  Activations acts;
  acts.inputs.reserve(layers_.size() + 1);
  acts.inputs.push_back(s);
  for (const Layer& layer : layers_) {
    const Tensor& x = acts.inputs.back();
    Tensor y = std::visit(
        Overloaded{
            [&](const AffineLayer& a) {
              Tensor out({a.weight.shape()[0]});
              affine_forward(a, x, out);
              return out;
            },
            [&](const ConvLayer& c) {
              Tensor out(conv_output_shape(c, x.shape()));
              conv_forward(c, x, out);
              return out;
            },
            [&](const ReluLayer&) {
              Tensor out = x;
              for (double& v : out.data()) v = std::max(v, 0.0);
              return out;
            },
            [&](const FlattenLayer&) { return x.reshaped({x.size()}); },
        },
        layer);
    acts.inputs.push_back(std::move(y));
  }
  require_finite(acts.output(), "network forward");
  return acts;
}

Tensor Network::forward(const Tensor& s) const { return forward_trace(s).output(); }

Tensor Network::backward_input(const Activations& acts, const Tensor& out_grad) const {
  require_same_shape(acts.output(), out_grad, "network backward");
  Tensor g = out_grad;
  for (std::size_t i = layers_.size(); i-- > 0;) {
    g = layer_backward(layers_[i], acts.inputs[i], acts.inputs[i + 1], g, nullptr);
  }
  require_finite(g, "input gradient");
  return g;
}

ParamGrads Network::zero_grads() const {
  ParamGrads grads(layers_.size());
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    std::visit(Overloaded{
                   [&](const AffineLayer& a) {
                     grads[i] = {Tensor(a.weight.shape()), Tensor(a.bias.shape())};
                   },
                   [&](const ConvLayer& c) {
                     grads[i] = {Tensor(c.weight.shape()), Tensor(c.bias.shape())};
                   },
                   [](const auto&) {},
               },
               layers_[i]);
  }
  return grads;
}

ParamGrads Network::backward_params(const Activations& acts, const Tensor& out_grad,
                                    Tensor* input_grad) const {
  require_same_shape(acts.output(), out_grad, "network backward");
  ParamGrads grads = zero_grads();
  Tensor g = out_grad;
  for (std::size_t i = layers_.size(); i-- > 0;) {
    g = layer_backward(layers_[i], acts.inputs[i], acts.inputs[i + 1], g, &grads[i]);
  }
  if (input_grad != nullptr) *input_grad = g;
  for (const LayerGrad& lg : grads) {
    require_finite(lg.weight, "parameter gradient");
    require_finite(lg.bias, "parameter gradient");
  }
  return grads;
}

void Network::accumulate_param_grads(const Activations& acts, const Tensor& out_grad,
                                     ParamGrads& into) const {
  require_same_shape(acts.output(), out_grad, "network backward");
  if (into.size() != layers_.size()) throw ShapeError("gradient buffer does not match network");
  Tensor g = out_grad;
  for (std::size_t i = layers_.size(); i-- > 0;) {
    // The input gradient of the first parametrised layer is never needed.
    if (i == 0) {
      if (const auto* a = std::get_if<AffineLayer>(&layers_[0])) {
        affine_backward(*a, acts.inputs[0], g, nullptr, &into[0]);
        return;
      }
      if (const auto* c = std::get_if<ConvLayer>(&layers_[0])) {
        conv_backward(*c, acts.inputs[0], g, nullptr, &into[0]);
        return;
      }
    }
    g = layer_backward(layers_[i], acts.inputs[i], acts.inputs[i + 1], g, &into[i]);
  }
}

std::size_t Network::parameter_count() const {
  std::size_t n = 0;
  for (const Layer& layer : layers_) {
    if (const auto* a = std::get_if<AffineLayer>(&layer)) n += a->weight.size() + a->bias.size();
    if (const auto* c = std::get_if<ConvLayer>(&layer)) n += c->weight.size() + c->bias.size();
  }
  return n;
}

bool Network::parameters_finite() const {
  for (const Layer& layer : layers_) {
    if (const auto* a = std::get_if<AffineLayer>(&layer)) {
      if (!a->weight.all_finite() || !a->bias.all_finite()) return false;
    }
    if (const auto* c = std::get_if<ConvLayer>(&layer)) {
      if (!c->weight.all_finite() || !c->bias.all_finite()) return false;
    }
  }
  return true;
}

ValueNetwork::ValueNetwork(Network net) : net_(std::move(net)) {
  if (net_.out_dim() != 1) {
    throw ShapeError("value network must have one output, got " + std::to_string(net_.out_dim()));
  }
}

double ValueNetwork::value(const Tensor& s) const { return net_.forward(s)[0]; }

Tensor ValueNetwork::gradient(const Tensor& s) const {
  const Activations acts = net_.forward_trace(s);
  return net_.backward_input(acts, Tensor::vector({1.0}));
}

Jacobian output_jacobian(const Network& net, const Tensor& s) {
  const Activations acts = net.forward_trace(s);
  Jacobian jac;
  jac.outputs = acts.output();
  jac.rows.reserve(net.out_dim());
  for (std::size_t o = 0; o < net.out_dim(); ++o) {
    Tensor seed({net.out_dim()});
    seed[o] = 1.0;
    jac.rows.push_back(net.backward_input(acts, seed));
  }
  return jac;
}

}  // namespace uaplab::num

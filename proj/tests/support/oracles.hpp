#pragma once

#include <cstdint>

#include "uaplab/numcore/loss.hpp"
#include "uaplab/numcore/network.hpp"

namespace uaplab::testkit {

/// ||a - b|| / max(||a||, ||b||, floor).
double relative_error(const num::Tensor& a, const num::Tensor& b, double floor = 1e-8);

/// Central differences of the scalar loss with respect to the input.
num::Tensor numeric_input_gradient(const num::Network& net, const num::Tensor& s, const num::Loss& loss,
                                   double h = 1e-5);
/// Central differences with respect to every parameter, layer by layer.
num::ParamGrads numeric_param_gradients(const num::Network& net, const num::Tensor& s, const num::Loss& loss,
                                        double h = 1e-5);

struct GradCheckStats {
  std::size_t nets = 0;
  std::size_t checks = 0;
  double max_input_error = 0.0;
  double max_param_error = 0.0;
};
/// Draws random nets (half with a conv front end), states and losses and
/// compares analytic against numeric gradients.
GradCheckStats run_gradient_checks(std::size_t nets, std::uint64_t seed);

/// Slot-tied minimizer of ||w - tile(f)||^2, found per pixel by golden-section
/// search; returned as one frame.
num::Tensor brute_force_tied_minimizer(const num::Tensor& w);

struct ProjectionStats {
  std::size_t instances = 0;
  double max_direction_error = 0.0;  ///< unit vectors of output frame vs minimizer
  double max_value_error = 0.0;      ///< output vs |gap| / ||w||^2 * minimizer
};
ProjectionStats run_projection_checks(std::size_t instances, std::uint64_t seed);

}  // namespace uaplab::testkit

#pragma once

#include <cstdint>
#include <span>

#include "uaplab/attackforge/perturbation.hpp"
#include "uaplab/attackforge/train_set.hpp"
#include "uaplab/numcore/network.hpp"

namespace uaplab::attack {

/// Gradient of -log softmax(Q(s))[a] with respect to s, a the greedy action.
num::Tensor greedy_loss_gradient(const num::Network& q, const num::Tensor& s);

/// epsilon * sign(gradient) for a single state; must be written into memory.
Perturbation fgsm(const num::Network& q, const num::Tensor& s, double epsilon);

/// Mean of greedy_loss_gradient over the first k states.
num::Tensor averaged_loss_gradient(const num::Network& q, std::span<const num::Tensor> states,
                                   std::size_t k);

/// epsilon * sign(mean gradient over the first k states), usable per slot.
Perturbation osfw(const num::Network& q, std::span<const num::Tensor> states, std::size_t k,
                  double epsilon);

/// OSFW computed offline from the first k states of an un-sanitized train set.
Perturbation osfw_u(const num::Network& q, const TrainSet& d, std::size_t k, double epsilon);

/// I.i.d. uniform noise on [-epsilon, epsilon].
Perturbation random_noise(double epsilon, const num::Shape& state_shape, std::uint64_t seed);

}  // namespace uaplab::attack

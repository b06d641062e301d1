#include "uaplab/attackforge/gradient_sign.hpp"

#include <stdexcept>

#include "uaplab/agentkit/policy.hpp"
#include "uaplab/numcore/loss.hpp"
#include "uaplab/numcore/random.hpp"

namespace uaplab::attack {
namespace {

void require_epsilon(double epsilon) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
}

num::Tensor signed_step(const num::Tensor& g, double epsilon) { return epsilon * num::sign(g); }

}  // namespace

num::Tensor greedy_loss_gradient(const num::Network& q, const num::Tensor& s) {
  const std::size_t a = agent::argmax(q.forward(s).data());
  return num::grad_input(q, s, num::Loss::neg_log_softmax(a));
}

Perturbation fgsm(const num::Network& q, const num::Tensor& s, double epsilon) {
  require_epsilon(epsilon);
  return Perturbation(PerturbationMode::PerState, s.shape(), epsilon,
                      signed_step(greedy_loss_gradient(q, s), epsilon));
}

num::Tensor averaged_loss_gradient(const num::Network& q, std::span<const num::Tensor> states,
                                   std::size_t k) {
  if (k == 0) throw std::invalid_argument("gradient averaging needs k >= 1");
  if (states.size() < k) {
    throw std::invalid_argument("gradient averaging needs " + std::to_string(k) + " states, got " +
                                std::to_string(states.size()));
  }
  num::Tensor sum(states.front().shape());
  for (std::size_t i = 0; i < k; ++i) sum += greedy_loss_gradient(q, states[i]);
  sum *= 1.0 / static_cast<double>(k);
  return sum;
}

Perturbation osfw(const num::Network& q, std::span<const num::Tensor> states, std::size_t k,
                  double epsilon) {
  require_epsilon(epsilon);
  const num::Tensor g = averaged_loss_gradient(q, states, k);
  return Perturbation(PerturbationMode::PerSlot, g.shape(), epsilon, signed_step(g, epsilon));
}

Perturbation osfw_u(const num::Network& q, const TrainSet& d, std::size_t k, double epsilon) {
  return osfw(q, d.states, k, epsilon);
}

Perturbation random_noise(double epsilon, const num::Shape& state_shape, std::uint64_t seed) {
  require_epsilon(epsilon);
  num::Rng rng(seed);
  num::Tensor values(state_shape);
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = num::uniform(rng, -epsilon, epsilon);
  return Perturbation(PerturbationMode::PerSlot, state_shape, epsilon, std::move(values));
}

}  // namespace uaplab::attack

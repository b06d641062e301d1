#include "uaplab/attackforge/injectors.hpp"

#include <algorithm>
#include <chrono>
#include <optional>
#include <stdexcept>

#include "uaplab/attackforge/gradient_sign.hpp"
#include "uaplab/numcore/random.hpp"

namespace uaplab::attack {
namespace {

void add_clamped(num::Tensor& frame, std::span<const double> r) {
  if (frame.size() != r.size()) throw num::ShapeError("injected frame size mismatch");
  for (std::size_t i = 0; i < r.size(); ++i) frame[i] = std::clamp(frame[i] + r[i], 0.0, 1.0);
}

class FixedInjector final : public agent::Injector {
 public:
  explicit FixedInjector(const Perturbation& r) : r_(r), state_(r.as_state()) {}

  void inject(num::Tensor& frame, std::size_t slot) override {
    if (r_.mode() == PerturbationMode::PerState) return;
    add_clamped(frame, r_.slot(slot));
  }
  bool rewrites_memory() const override { return r_.mode() == PerturbationMode::PerState; }
  void rewrite_state(num::Tensor& state) override { add_clamped(state, state_.data()); }

 private:
  Perturbation r_;
  num::Tensor state_;
};

class NoiseInjector final : public agent::Injector {
 public:
  NoiseInjector(double epsilon, std::uint64_t seed) : epsilon_(epsilon), seed_(seed) {}

  void begin_episode(std::uint64_t seed) override {
    std::seed_seq seq{seed_, seed, std::uint64_t{0x6e6f697365}};
    rng_.seed(seq);
  }
  void inject(num::Tensor& frame, std::size_t) override {
    for (std::size_t i = 0; i < frame.size(); ++i) {
      frame[i] = std::clamp(frame[i] + num::uniform(rng_, -epsilon_, epsilon_), 0.0, 1.0);
    }
  }

 private:
  double epsilon_;
  std::uint64_t seed_;
  num::Rng rng_;
};

class FgsmInjector final : public agent::Injector {
 public:
  FgsmInjector(const num::Network& q, double epsilon) : q_(q), epsilon_(epsilon) {}
  void inject(num::Tensor&, std::size_t) override {}
  bool rewrites_memory() const override { return true; }
  void rewrite_state(num::Tensor& state) override {
    const Perturbation r = fgsm(q_, state, epsilon_);
    add_clamped(state, r.storage().data());
  }

 private:
  const num::Network& q_;
  double epsilon_;
};

class OsfwInjector final : public agent::Injector {
 public:
  OsfwInjector(const num::Network& q, std::size_t k, double epsilon, std::shared_ptr<OnlineCostLog> log)
      : q_(q), k_(k), epsilon_(epsilon), log_(std::move(log)) {}

  void begin_episode(std::uint64_t) override {
    seen_.clear();
    r_.reset();
  }
  void observe_state(const num::Tensor& state) override {
    if (r_) return;
    seen_.push_back(state);
    if (seen_.size() < k_) return;
    const auto start = std::chrono::steady_clock::now();
    r_ = osfw(q_, seen_, k_, epsilon_);
    const std::chrono::duration<double> took = std::chrono::steady_clock::now() - start;
    if (log_) log_->record(took.count());
    seen_.clear();
  }
  void inject(num::Tensor& frame, std::size_t slot) override {
    if (r_) add_clamped(frame, r_->slot(slot));
  }

 private:
  const num::Network& q_;
  std::size_t k_;
  double epsilon_;
  std::shared_ptr<OnlineCostLog> log_;
  std::vector<num::Tensor> seen_;
  std::optional<Perturbation> r_;
};

}  // namespace

std::unique_ptr<agent::Injector> make_injector(const Perturbation& r) {
  if (!r.storage().all_finite()) throw std::invalid_argument("perturbation must be finite");
  return std::make_unique<FixedInjector>(r);
}

agent::InjectorFactory injector_factory(const Perturbation& r) {
  auto shared = std::make_shared<const Perturbation>(r);
  return [shared] { return make_injector(*shared); };
}

bool requires_memory_rewrite(const Perturbation& r) { return r.mode() == PerturbationMode::PerState; }

agent::InjectorFactory noise_injector_factory(double epsilon, std::uint64_t seed) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  return [epsilon, seed] { return std::make_unique<NoiseInjector>(epsilon, seed); };
}

agent::InjectorFactory fgsm_injector_factory(const num::Network& q, double epsilon) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  return [&q, epsilon] { return std::make_unique<FgsmInjector>(q, epsilon); };
}

void OnlineCostLog::record(double seconds) {
  std::lock_guard lock(mu_);
  samples_.push_back(seconds);
}

std::vector<double> OnlineCostLog::samples() const {
  std::lock_guard lock(mu_);
  return samples_;
}

agent::InjectorFactory osfw_injector_factory(const num::Network& q, std::size_t k, double epsilon,
                                             std::shared_ptr<OnlineCostLog> log) {
  if (k == 0) throw std::invalid_argument("OSFW needs k >= 1");
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  return [&q, k, epsilon, log] { return std::make_unique<OsfwInjector>(q, k, epsilon, log); };
}

}  // namespace uaplab::attack

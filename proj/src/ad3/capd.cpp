#include "uaplab/ad3/capd.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace uaplab::ad3 {

Capd::Capd(std::size_t actions, double smoothing)
    : Capd(actions, smoothing, std::vector<double>(actions * actions, 0.0)) {}

Capd::Capd(std::size_t actions, double smoothing, std::vector<double> counts)
    : actions_(actions), smoothing_(smoothing), counts_(std::move(counts)), row_totals_(actions, 0.0) {
  if (actions_ == 0) throw std::invalid_argument("CAPD needs at least one action");
  if (!(smoothing_ > 0.0) || !std::isfinite(smoothing_)) {
    throw std::invalid_argument("CAPD smoothing must be positive");
  }
  if (counts_.size() != actions_ * actions_) throw std::invalid_argument("CAPD count table has wrong size");
  for (std::size_t p = 0; p < actions_; ++p) {
    for (std::size_t n = 0; n < actions_; ++n) {
      const double c = counts_[p * actions_ + n];
      if (!(c >= 0.0) || !std::isfinite(c)) throw std::invalid_argument("CAPD counts must be non-negative");
      row_totals_[p] += c;
    }
    total_ += row_totals_[p];
  }
}

void Capd::check(std::size_t a) const {
  if (a >= actions_) throw std::out_of_range("action " + std::to_string(a) + " outside the CAPD action set");
}

double Capd::count(std::size_t prev, std::size_t next) const {
  check(prev);
  check(next);
  return counts_[prev * actions_ + next];
}

void Capd::add(std::size_t prev, std::size_t next) {
  check(prev);
  check(next);
  counts_[prev * actions_ + next] += 1.0;
  row_totals_[prev] += 1.0;
  total_ += 1.0;
}

void Capd::add_sequence(std::span<const std::size_t> actions) {
  for (std::size_t i = 1; i < actions.size(); ++i) add(actions[i - 1], actions[i]);
}

double Capd::probability(std::size_t prev, std::size_t next) const {
  return (count(prev, next) + smoothing_) /
         (row_totals_[prev] + smoothing_ * static_cast<double>(actions_));
}

std::vector<double> Capd::row(std::size_t prev) const {
  std::vector<double> out(actions_);
  for (std::size_t n = 0; n < actions_; ++n) out[n] = probability(prev, n);
  return out;
}

std::vector<double> Capd::previous_marginal() const {
  if (total_ == 0.0) return std::vector<double>(actions_, 1.0 / static_cast<double>(actions_));
  std::vector<double> out(actions_);
  for (std::size_t p = 0; p < actions_; ++p) out[p] = row_totals_[p] / total_;
  return out;
}

double kl_divergence(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size() || p.empty()) throw std::invalid_argument("KL: distributions differ in size");
  double kl = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (!(p[i] > 0.0) || !(q[i] > 0.0)) {
      throw std::invalid_argument("KL: entries must be strictly positive (smooth first)");
    }
    kl += p[i] * std::log(p[i] / q[i]);
  }
  // Rounding can leave a tiny negative value for equal inputs.
  return kl < 0.0 ? 0.0 : kl;
}

double capd_divergence(const Capd& current, const Capd& learned) {
  if (current.actions() != learned.actions()) throw std::invalid_argument("CAPD action sets differ");
  const std::vector<double> weight = current.previous_marginal();
  double total = 0.0;
  for (std::size_t p = 0; p < current.actions(); ++p) {
    if (weight[p] == 0.0) continue;
    total += weight[p] * kl_divergence(current.row(p), learned.row(p));
  }
  return total;
}

Capd learn_capd(std::span<const env::EpisodeTrace> traces, std::size_t actions, double smoothing) {
  Capd capd(actions, smoothing);
  bool usable = false;
  for (const auto& t : traces) {
    if (t.actions.size() >= 2) usable = true;
    capd.add_sequence(t.actions);
  }
  if (!usable) throw std::invalid_argument("learn_capd needs a trace with at least two actions");
  return capd;
}

}  // namespace uaplab::ad3

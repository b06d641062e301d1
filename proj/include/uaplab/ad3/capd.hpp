#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "uaplab/envlab/trace.hpp"

namespace uaplab::ad3 {

/// Bigram model of the next action given the previous one, with additive
/// smoothing so every conditional probability is strictly positive.
class Capd {
 public:
  explicit Capd(std::size_t actions, double smoothing = 1.0);
  /// counts is row-major (previous, next).
  Capd(std::size_t actions, double smoothing, std::vector<double> counts);

  std::size_t actions() const { return actions_; }
  double smoothing() const { return smoothing_; }
  const std::vector<double>& counts() const { return counts_; }
  double count(std::size_t prev, std::size_t next) const;
  double transitions() const { return total_; }

  void add(std::size_t prev, std::size_t next);
  void add_sequence(std::span<const std::size_t> actions);

  /// Smoothed P(next | prev).
  double probability(std::size_t prev, std::size_t next) const;
  std::vector<double> row(std::size_t prev) const;
  /// Unsmoothed share of transitions leaving each action; uniform when empty.
  std::vector<double> previous_marginal() const;

  friend bool operator==(const Capd&, const Capd&) = default;

 private:
  void check(std::size_t a) const;

  std::size_t actions_;
  double smoothing_;
  std::vector<double> counts_;
  std::vector<double> row_totals_;
  double total_ = 0.0;
};

/// KL(p || q) in nats. Both must be strictly positive distributions of equal size.
double kl_divergence(std::span<const double> p, std::span<const double> q);

/// Row-wise KL(current || learned), weighted by the current model's
/// previous-action marginal.
double capd_divergence(const Capd& current, const Capd& learned);

/// Accumulates consecutive action pairs across all traces.
Capd learn_capd(std::span<const env::EpisodeTrace> traces, std::size_t actions,
                double smoothing = 1.0);

}  // namespace uaplab::ad3

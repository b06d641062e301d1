#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <ostream>
#include <span>
#include <vector>

#include "uaplab/envlab/env_spec.hpp"
#include "uaplab/numcore/network.hpp"

namespace uaplab::attack {

/// States gathered from one monitored episode, scored for criticality.
struct TrainSet {
  std::vector<num::Tensor> states;
  std::vector<std::size_t> actions;  ///< greedy action at each state
  std::vector<double> scores;
  double beta = 0.0;               ///< mean score
  std::vector<bool> critical;      ///< scores[i] >= beta

  std::size_t size() const { return states.size(); }
  /// The critical states only, in collection order.
  std::vector<num::Tensor> sanitized() const;
  /// Throws std::invalid_argument when the parallel arrays disagree or the
  /// mask or beta do not follow from the scores.
  void validate() const;
};

/// Population variance of softmax(Q(s, .)) across actions.
double criticality_score(const num::Network& q, const num::Tensor& s);

struct Sanitization {
  double beta = 0.0;
  std::vector<bool> critical;
};
/// beta = mean(scores); a state is critical when its score is >= beta.
Sanitization sanitize_scores(std::span<const double> scores);

/// Scores and sanitizes an explicit list of states.
TrainSet build_train_set(const num::Network& q, std::vector<num::Tensor> states);

/// Plays one clean greedy episode and keeps the state seen at every decision.
TrainSet collect_train_set(const num::Network& q, const env::EnvSpec& spec, std::uint64_t seed);

// Train-set file: "UAPLTRS1", u32 version, u64 count, f64 beta, then per
// state: u64 action, f64 score, u8 critical, tensor.
void write_train_set(std::ostream& out, const TrainSet& d);
TrainSet read_train_set(std::istream& in);
void save_train_set(const std::filesystem::path& path, const TrainSet& d);
TrainSet load_train_set(const std::filesystem::path& path);

}  // namespace uaplab::attack

#pragma once

#include <cstddef>
#include <deque>
#include <filesystem>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include "uaplab/ad3/capd.hpp"

namespace uaplab::ad3 {

struct DetectorConfig {
  std::size_t k1 = 12;   ///< learning episodes
  std::size_t k2 = 24;   ///< calibration episodes
  double p = 100.0;      ///< threshold percentile
  double r = 0.9;        ///< fraction of the window that must exceed
  std::size_t t1 = 400;  ///< warm-up steps without scores
  std::size_t t2 = 200;  ///< sliding window length
  double smoothing = 1.0;

  void validate() const;
  /// Scales t1 and t2 by horizon / reference_length, keeping both >= 1.
  DetectorConfig scaled_to(std::size_t horizon, std::size_t reference_length = 1600) const;
  /// Number of exceedances in a full window that raises an alarm.
  std::size_t required_exceedances() const;

  friend bool operator==(const DetectorConfig&, const DetectorConfig&) = default;
};

struct DetectorModel {
  Capd learned{1};
  double threshold = 0.0;
  DetectorConfig cfg;

  friend bool operator==(const DetectorModel&, const DetectorModel&) = default;
};

/// Linear interpolation between order statistics at rank p/100 * (n - 1).
double percentile(std::vector<double> values, double p);

/// KL scores of an action stream against the learned CAPD. Steps are counted
/// from 1; the score at step t uses the first t actions and is reported for
/// every t > t1.
std::vector<double> episode_scores(const Capd& learned, std::span<const std::size_t> actions,
                                   std::size_t t1);

/// Threshold = p-th percentile of pooled post-warm-up scores of the traces.
DetectorModel calibrate(const Capd& learned, std::span<const env::EpisodeTrace> traces,
                        const DetectorConfig& cfg);

/// learn_capd on the first set, then calibrate on the second.
DetectorModel fit_detector(std::span<const env::EpisodeTrace> learning,
                           std::span<const env::EpisodeTrace> calibration, std::size_t actions,
                           const DetectorConfig& cfg);

/// Count of threshold exceedances among the last `length` scores.
class ExceedanceWindow {
 public:
  ExceedanceWindow(std::size_t length, std::size_t required);
  /// Records one comparison; true when the window now holds `required` exceedances.
  bool push(bool exceeds);
  std::size_t exceedances() const { return count_; }

 private:
  std::size_t length_;
  std::size_t required_;
  std::deque<bool> window_;
  std::size_t count_ = 0;
};

/// Online detector for one episode. Alarms latch.
class Monitor {
 public:
  explicit Monitor(const DetectorModel& model);

  /// Feeds the next action; returns the alarm step once raised.
  std::optional<std::size_t> push(std::size_t action);

  std::size_t step() const { return step_; }
  std::optional<std::size_t> alarm() const { return alarm_; }
  const Capd& current() const { return current_; }
  std::optional<double> last_score() const { return last_score_; }

 private:
  const DetectorModel& model_;
  Capd current_;
  std::optional<std::size_t> previous_;
  std::size_t step_ = 0;
  ExceedanceWindow window_;
  std::optional<double> last_score_;
  std::optional<std::size_t> alarm_;
};

/// Runs a Monitor over a full stream.
std::optional<std::size_t> monitor(const DetectorModel& model, std::span<const std::size_t> actions);

// Text model file, see docs/formats.md.
void write_model(std::ostream& out, const DetectorModel& model);
DetectorModel read_model(std::istream& in);
void save_model(const std::filesystem::path& path, const DetectorModel& model);
DetectorModel load_model(const std::filesystem::path& path);

}  // namespace uaplab::ad3

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "uaplab/ad3/detector.hpp"
#include "uaplab/agentkit/agent_checkpoint.hpp"
#include "uaplab/bench/experiment.hpp"

namespace uaplab::bench {

struct PrecisionRecall {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;
  double precision = 1.0;
  double recall = 1.0;
  bool precision_undefined = false;  ///< no alarms: reported as 1
  bool recall_undefined = false;     ///< no attacked episodes: reported as 1
};
/// Alarm = positive, attacked = true label.
PrecisionRecall precision_recall(const std::vector<bool>& attacked, const std::vector<bool>& alarmed);

/// Clean greedy episodes used to learn and calibrate the detector.
struct DetectorTraining {
  ad3::DetectorConfig cfg;           ///< already scaled to the horizon
  std::uint64_t learn_seed_begin = 2000;
  std::uint64_t calibrate_seed_begin = 3000;
};

/// Default detector settings rescaled to the agent's horizon.
DetectorTraining default_detector_training(const env::EnvSpec& spec, std::size_t reference_length = 1600);

ad3::DetectorModel train_detector(const agent::AgentCheckpoint& agent, const DetectorTraining& training);

struct LabeledEpisode {
  env::EpisodeTrace trace;
  bool attacked = false;
  std::optional<std::size_t> alarm;
};

struct DetectionStudy {
  std::vector<LabeledEpisode> episodes;  ///< clean first, then attacked
  PrecisionRecall scores;
  double losing_rate_no_defense = 0.0;   ///< over attacked episodes
  double losing_rate_suspended = 0.0;    ///< lost only when never alarmed
  double clean_losing_rate = 0.0;
  double clean_losing_rate_suspended = 0.0;
};

struct StudyConfig {
  AttackKind attack = AttackKind::UapS;
  double epsilon = 0.05;
  std::size_t clean_episodes = 10;
  std::size_t attacked_episodes = 10;
  std::uint64_t clean_seed_begin = 1000;
  std::uint64_t attacked_seed_begin = 1000;
  std::uint64_t collect_seed = 1;
  std::uint64_t noise_seed = 0;
  attack::AttackConfig attack_cfg;
  std::size_t workers = 1;
};

/// Plays clean and persistently attacked episodes and monitors every one.
DetectionStudy detection_study(const agent::AgentCheckpoint& agent, const ad3::DetectorModel& model,
                               const StudyConfig& cfg);

/// detection.tsv + losing_rate.tsv + detection_summary.txt.
void write_detection_report(const std::filesystem::path& dir, const DetectionStudy& study, const StudyConfig& cfg);

}  // namespace uaplab::bench

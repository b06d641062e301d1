#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "uaplab/agentkit/agent_checkpoint.hpp"
#include "uaplab/attackforge/train_set.hpp"
#include "uaplab/bench/experiment.hpp"

namespace uaplab::bench {

struct TimingStats {
  double mean = 0.0;
  double median = 0.0;
  double stddev = 0.0;  ///< population
  std::size_t reps = 0;
};
TimingStats summarize_times(std::vector<double> seconds);

/// 1 / frame_rate - response_time.
double frame_budget(double frame_rate, double response_time);

struct TimingConfig {
  std::vector<AttackKind> attacks{AttackKind::Random, AttackKind::Fgsm, AttackKind::Osfw,
                                  AttackKind::OsfwU, AttackKind::UapS, AttackKind::UapO};
  double epsilon = 0.05;
  std::size_t forward_passes = 1000;  ///< per response-time repetition
  std::size_t apply_samples = 1000;   ///< observations per apply repetition
  std::size_t reps = 10;
  bool pin_cpu = true;
  attack::AttackConfig attack_cfg;
  std::uint64_t noise_seed = 0;

  void validate() const;
};

struct AttackTiming {
  AttackKind attack = AttackKind::None;
  TimingStats offline;        ///< generator wall time; zero for online attacks
  TimingStats online;         ///< worst per-observation online work
  TimingStats apply;          ///< adding an existing perturbation to one observation
  bool memory_rewrite = false;
  bool realtime_feasible = false;  ///< online.mean < t_max
};

struct TimingReport {
  double frame_rate = 0.0;
  TimingStats response;  ///< seconds per forward + greedy act
  double response_time = 0.0;
  double t_max = 0.0;
  bool pinned = false;
  std::vector<AttackTiming> attacks;

  /// T_max recomputed from the stored fields matches to 1e-12.
  bool consistent() const;
};

/// Strictly single-threaded; pins to one CPU when possible.
TimingReport bench_timing(const agent::AgentCheckpoint& agent, const attack::TrainSet& d,
                          const TimingConfig& cfg);

/// timing_report.tsv (first line marks the contents nondeterministic) and
/// timing_summary.txt.
void write_timing_report(const std::filesystem::path& dir, const TimingReport& report);

}  // namespace uaplab::bench

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "uaplab/ad3/detector.hpp"
#include "uaplab/agentkit/agent_checkpoint.hpp"
#include "uaplab/agentkit/evaluate.hpp"
#include "uaplab/attackforge/train_set.hpp"
#include "uaplab/attackforge/uap.hpp"

namespace uaplab::bench {

/// Pipeline stages; the CLI exits with the stage's value on failure.
enum class Stage : int {
  Config = 2,
  Load = 3,
  Train = 4,
  Collect = 5,
  Generate = 6,
  Evaluate = 7,
  Detect = 8,
  Timing = 9,
  Report = 10,
};
std::string to_string(Stage stage);

class StageError : public std::runtime_error {
 public:
  StageError(Stage stage, const std::string& what)
      : std::runtime_error(to_string(stage) + ": " + what), stage_(stage) {}
  Stage stage() const { return stage_; }
  int exit_code() const { return static_cast<int>(stage_); }

 private:
  Stage stage_;
};

/// Runs f, rethrowing any non-stage exception as a StageError of stage s.
template <class F>
auto in_stage(Stage s, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(s, e.what());
  }
}

enum class AttackKind { None, Random, Fgsm, Osfw, OsfwU, UapS, UapO, UapCont };
std::string to_string(AttackKind kind);
AttackKind parse_attack(const std::string& name);
/// Offline generators precompute one perturbation per epsilon.
bool is_precomputed(AttackKind kind);

std::vector<double> default_epsilons();

struct ExperimentConfig {
  std::filesystem::path agent_path;
  AttackKind attack = AttackKind::None;
  std::vector<double> epsilons = default_epsilons();
  std::size_t episodes = 10;
  std::uint64_t seed_begin = 1000;
  std::uint64_t collect_seed = 1;  ///< the monitored episode behind D_train
  std::uint64_t noise_seed = 0;
  std::optional<std::filesystem::path> detector_path;
  std::filesystem::path output_dir;
  attack::AttackConfig attack_cfg;  ///< epsilon is overridden per row
  std::size_t workers = 1;

  /// Throws StageError(Config) on bad values or missing paths.
  void validate() const;
};

struct AttackRow {
  double epsilon = 0.0;
  double mean_return = 0.0;
  double std_return = 0.0;
  double losing_rate = 0.0;
  double fooling_rate = 0.0;   ///< on the full D_train; NaN when not defined
  double achieved_delta = 0.0; ///< generator's own rate on what it fit; NaN when none
  bool reached_target = true;
  std::size_t alarms = 0;
  double alarm_rate = 0.0;
  double losing_rate_suspended = 0.0;
  std::vector<env::EpisodeTrace> traces;
  std::optional<attack::Perturbation> perturbation;  ///< when one is applied as-is
};

struct AttackReport {
  std::string env;
  AttackKind attack = AttackKind::None;
  std::size_t episodes = 0;
  std::uint64_t seed_begin = 0;
  std::uint64_t collect_seed = 0;
  double clean_return = 0.0;
  bool memory_rewrite = false;
  bool has_detector = false;
  std::vector<AttackRow> rows;
};

/// Fooling rate of an attack at epsilon over D, with the definition used in
/// reports: per-state FGSM for fgsm, the fixed noise draw for random, the
/// applied perturbation otherwise. NaN for none and osfw.
double row_fooling_rate(AttackKind kind, const num::Network& q, const attack::TrainSet& d,
                        double epsilon, const attack::Perturbation* applied);

/// Builds the perturbation an offline attack applies at this epsilon.
struct Generated {
  attack::Perturbation perturbation;
  double achieved_delta = 0.0;
  bool reached_target = true;
};
Generated generate(AttackKind kind, const num::Network& q, const attack::TrainSet& d,
                   const attack::AttackConfig& cfg, std::uint64_t noise_seed);

/// Per-episode injector for the attack at cfg.epsilon; `applied` must hold the
/// generated perturbation for precomputed attacks.
agent::InjectorFactory attack_factory(AttackKind kind, const num::Network& q, double epsilon,
                                      std::size_t k, std::uint64_t noise_seed,
                                      const attack::Perturbation* applied);

AttackReport run_experiment(const ExperimentConfig& cfg, const agent::AgentCheckpoint& agent,
                            const attack::TrainSet& d, const ad3::DetectorModel* detector);

/// Loads everything named by cfg, runs, and writes the report files.
AttackReport run_experiment(const ExperimentConfig& cfg);

}  // namespace uaplab::bench

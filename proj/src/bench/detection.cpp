#include "uaplab/bench/detection.hpp"

#include <cstdio>
#include <fstream>

#include "uaplab/agentkit/evaluate.hpp"
#include "uaplab/attackforge/train_set.hpp"
#include "uaplab/bench/report.hpp"

namespace uaplab::bench {

PrecisionRecall precision_recall(const std::vector<bool>& attacked, const std::vector<bool>& alarmed) {
  if (attacked.size() != alarmed.size()) throw std::invalid_argument("labels and alarms differ in length");
  PrecisionRecall pr;
  for (std::size_t i = 0; i < attacked.size(); ++i) {
    if (alarmed[i]) (attacked[i] ? pr.tp : pr.fp)++;
    else (attacked[i] ? pr.fn : pr.tn)++;
  }
  if (pr.tp + pr.fp == 0) pr.precision_undefined = true;
  else pr.precision = static_cast<double>(pr.tp) / static_cast<double>(pr.tp + pr.fp);
  if (pr.tp + pr.fn == 0) pr.recall_undefined = true;
  else pr.recall = static_cast<double>(pr.tp) / static_cast<double>(pr.tp + pr.fn);
  return pr;
}

DetectorTraining default_detector_training(const env::EnvSpec& spec, std::size_t reference_length) {
  DetectorTraining t;
  t.cfg = ad3::DetectorConfig{}.scaled_to(spec.horizon, reference_length);
  return t;
}

ad3::DetectorModel train_detector(const agent::AgentCheckpoint& agent, const DetectorTraining& training) {
  training.cfg.validate();
  const auto learn_seeds = agent::seed_range(training.learn_seed_begin, training.cfg.k1);
  const auto calib_seeds = agent::seed_range(training.calibrate_seed_begin, training.cfg.k2);
  const auto learning = agent::evaluate(agent.q, agent.spec, learn_seeds.size(), learn_seeds);
  const auto calibration = agent::evaluate(agent.q, agent.spec, calib_seeds.size(), calib_seeds);
  return ad3::fit_detector(learning.traces, calibration.traces, agent.spec.num_actions(), training.cfg);
}

DetectionStudy detection_study(const agent::AgentCheckpoint& agent, const ad3::DetectorModel& model,
                               const StudyConfig& cfg) {
  if (cfg.attack == AttackKind::None) throw StageError(Stage::Config, "detection study needs an attack");
  const attack::TrainSet d =
      in_stage(Stage::Collect, [&] { return attack::collect_train_set(agent.q, agent.spec, cfg.collect_seed); });
  attack::AttackConfig acfg = cfg.attack_cfg;
  acfg.epsilon = cfg.epsilon;
  std::optional<attack::Perturbation> applied;
  if (is_precomputed(cfg.attack)) {
    applied = in_stage(Stage::Generate, [&] { return generate(cfg.attack, agent.q, d, acfg, cfg.noise_seed).perturbation; });
  }

  DetectionStudy study;
  in_stage(Stage::Evaluate, [&] {
    const auto clean_seeds = agent::seed_range(cfg.clean_seed_begin, cfg.clean_episodes);
    const auto attacked_seeds = agent::seed_range(cfg.attacked_seed_begin, cfg.attacked_episodes);
    auto clean = agent::evaluate(agent.q, agent.spec, clean_seeds.size(), clean_seeds, {}, cfg.workers);
    const auto factory = attack_factory(cfg.attack, agent.q, cfg.epsilon, acfg.k, cfg.noise_seed, applied ? &*applied : nullptr);
    auto attacked = agent::evaluate(agent.q, agent.spec, attacked_seeds.size(), attacked_seeds, factory, cfg.workers);
    for (auto& t : clean.traces) study.episodes.push_back({std::move(t), false, std::nullopt});
    for (auto& t : attacked.traces) study.episodes.push_back({std::move(t), true, std::nullopt});
  });

  in_stage(Stage::Detect, [&] {
    std::vector<bool> labels;
    std::vector<bool> alarms;
    std::size_t lost[2] = {0, 0};
    std::size_t lost_suspended[2] = {0, 0};
    std::size_t count[2] = {0, 0};
    for (auto& e : study.episodes) {
      // The detector only reads actions, so replaying the stream after the
      // fact gives the same alarm step as monitoring live.
      e.alarm = ad3::monitor(model, e.trace.actions);
      labels.push_back(e.attacked);
      alarms.push_back(e.alarm.has_value());
      const int g = e.attacked ? 1 : 0;
      ++count[g];
      if (e.trace.terminal == env::Terminal::Lose) {
        ++lost[g];
        if (!e.alarm) ++lost_suspended[g];
      }
    }
    study.scores = precision_recall(labels, alarms);
    const auto ratio = [](std::size_t n, std::size_t d) { return d ? static_cast<double>(n) / static_cast<double>(d) : 0.0; };
    study.clean_losing_rate = ratio(lost[0], count[0]);
    study.clean_losing_rate_suspended = ratio(lost_suspended[0], count[0]);
    study.losing_rate_no_defense = ratio(lost[1], count[1]);
    study.losing_rate_suspended = ratio(lost_suspended[1], count[1]);
  });
  return study;
}

void write_detection_report(const std::filesystem::path& dir, const DetectionStudy& study, const StudyConfig& cfg) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "detection.tsv");
    if (!out) throw std::runtime_error("cannot write detection report in " + dir.string());
    out << "# uaplab detection report v1\n"
        << "# attack " << to_string(cfg.attack) << '\n'
        << "# epsilon " << format_real(cfg.epsilon) << '\n'
        << "# precision " << format_real(study.scores.precision) << (study.scores.precision_undefined ? " undefined" : "") << '\n'
        << "# recall " << format_real(study.scores.recall) << (study.scores.recall_undefined ? " undefined" : "") << '\n'
        << "seed\tattacked\treturn\tterminal\talarm_step\n";
    for (const auto& e : study.episodes) {
      out << e.trace.seed << '\t' << (e.attacked ? 1 : 0) << '\t' << format_real(e.trace.total_return) << '\t'
          << env::to_string(e.trace.terminal) << '\t' << (e.alarm ? std::to_string(*e.alarm) : "none") << '\n';
    }
  }
  {
    std::ofstream out(dir / "losing_rate.tsv");
    out << "# uaplab losing rate v1\n"
        << "episodes\tno_defense\twith_ad3\n"
        << "clean\t" << format_real(study.clean_losing_rate) << '\t' << format_real(study.clean_losing_rate_suspended) << '\n'
        << to_string(cfg.attack) << '\t' << format_real(study.losing_rate_no_defense) << '\t'
        << format_real(study.losing_rate_suspended) << '\n';
  }
  std::ofstream out(dir / "detection_summary.txt");
  char buf[200];
  std::snprintf(buf, sizeof buf, "AD3 against %s at epsilon %.4g\n", to_string(cfg.attack).c_str(), cfg.epsilon);
  out << buf;
  std::snprintf(buf, sizeof buf, "precision %.3f%s, recall %.3f%s (tp %zu fp %zu fn %zu tn %zu)\n", study.scores.precision,
                study.scores.precision_undefined ? " [no alarms]" : "", study.scores.recall,
                study.scores.recall_undefined ? " [no attacked episodes]" : "", study.scores.tp, study.scores.fp,
                study.scores.fn, study.scores.tn);
  out << buf;
  std::snprintf(buf, sizeof buf, "losing rate: clean %.2f / %.2f, attacked %.2f / %.2f (no defense / with AD3)\n",
                study.clean_losing_rate, study.clean_losing_rate_suspended, study.losing_rate_no_defense,
                study.losing_rate_suspended);
  out << buf;
}

}  // namespace uaplab::bench

#include "uaplab/bench/experiment.hpp"

#include <cmath>
#include <limits>

#include "uaplab/agentkit/evaluate.hpp"
#include "uaplab/attackforge/continuous.hpp"
#include "uaplab/attackforge/gradient_sign.hpp"
#include "uaplab/attackforge/injectors.hpp"
#include "uaplab/bench/report.hpp"

namespace uaplab::bench {
namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

std::string to_string(Stage stage) {
  switch (stage) {
    case Stage::Config:
      return "config";
    case Stage::Load:
      return "load";
    case Stage::Train:
      return "train";
    case Stage::Collect:
      return "collect";
    case Stage::Generate:
      return "generate";
    case Stage::Evaluate:
      return "evaluate";
    case Stage::Detect:
      return "detect";
    case Stage::Timing:
      return "timing";
    case Stage::Report:
      return "report";
  }
  return "unknown";
}

std::string to_string(AttackKind kind) {
  switch (kind) {
    case AttackKind::None:
      return "none";
    case AttackKind::Random:
      return "random";
    case AttackKind::Fgsm:
      return "fgsm";
    case AttackKind::Osfw:
      return "osfw";
    case AttackKind::OsfwU:
      return "osfw_u";
    case AttackKind::UapS:
      return "uap_s";
    case AttackKind::UapO:
      return "uap_o";
    case AttackKind::UapCont:
      return "uap_cont";
  }
  return "none";
}

AttackKind parse_attack(const std::string& name) {
  for (AttackKind k : {AttackKind::None, AttackKind::Random, AttackKind::Fgsm, AttackKind::Osfw,
                       AttackKind::OsfwU, AttackKind::UapS, AttackKind::UapO, AttackKind::UapCont}) {
    if (to_string(k) == name) return k;
  }
  throw std::invalid_argument("unknown attack '" + name +
                              "' (none, random, fgsm, osfw, osfw_u, uap_s, uap_o, uap_cont)");
}

bool is_precomputed(AttackKind kind) {
  return kind == AttackKind::OsfwU || kind == AttackKind::UapS || kind == AttackKind::UapO ||
         kind == AttackKind::UapCont;
}

std::vector<double> default_epsilons() { return {0.004, 0.006, 0.01, 0.02, 0.05}; }

void ExperimentConfig::validate() const {
  const auto fail = [](const std::string& what) { throw StageError(Stage::Config, what); };
  if (!std::filesystem::exists(agent_path)) fail("agent checkpoint '" + agent_path.string() + "' not found");
  if (detector_path && !std::filesystem::exists(*detector_path)) {
    fail("detector model '" + detector_path->string() + "' not found");
  }
  if (epsilons.empty()) fail("epsilon list is empty");
  for (double e : epsilons) {
    if (!(e > 0.0) || !std::isfinite(e)) fail("epsilon values must be positive");
  }
  if (episodes == 0) fail("episodes must be >= 1");
  if (workers == 0) fail("workers must be >= 1");
  if (output_dir.empty()) fail("output directory not set");
  attack::AttackConfig probe = attack_cfg;
  probe.epsilon = epsilons.front();
  try {
    probe.validate();
  } catch (const std::exception& e) {
    fail(e.what());
  }
}

double row_fooling_rate(AttackKind kind, const num::Network& q, const attack::TrainSet& d,
                        double epsilon, const attack::Perturbation* applied) {
  if (d.size() == 0) return kNaN;
  switch (kind) {
    case AttackKind::None:
    case AttackKind::Osfw:
      return kNaN;
    case AttackKind::Fgsm: {
      std::size_t flipped = 0;
      for (std::size_t i = 0; i < d.size(); ++i) {
        const attack::Perturbation r = attack::fgsm(q, d.states[i], epsilon);
        const num::Tensor x = attack::perturb_state(d.states[i], r.storage());
        if (agent::act_greedy(q, x) != d.actions[i]) ++flipped;
      }
      return static_cast<double>(flipped) / static_cast<double>(d.size());
    }
    default:
      if (applied == nullptr) throw std::invalid_argument("fooling rate needs the applied perturbation");
      return attack::fooling_rate(q, d.states, *applied);
  }
}

Generated generate(AttackKind kind, const num::Network& q, const attack::TrainSet& d,
                   const attack::AttackConfig& cfg, std::uint64_t noise_seed) {
  cfg.validate();
  const std::vector<num::Tensor> sanitized = d.sanitized();
  switch (kind) {
    case AttackKind::UapS:
    case AttackKind::UapO: {
      const auto res = kind == AttackKind::UapS ? attack::uap_s(q, sanitized, cfg) : attack::uap_o(q, sanitized, cfg);
      return {res.perturbation, res.fooling_rate, res.reached_target};
    }
    case AttackKind::UapCont: {
      const attack::GreedyValueModel v(q);
      const auto res = attack::uap_continuous(v, sanitized, cfg);
      return {res.uap.perturbation, res.uap.fooling_rate, res.uap.reached_target};
    }
    case AttackKind::OsfwU:
      return {attack::osfw_u(q, d, cfg.k, cfg.epsilon), kNaN, true};
    case AttackKind::Random:
      return {attack::random_noise(cfg.epsilon, q.in_shape(), noise_seed), kNaN, true};
    default:
      throw std::invalid_argument("attack '" + to_string(kind) + "' has no offline perturbation");
  }
}

agent::InjectorFactory attack_factory(AttackKind kind, const num::Network& q, double epsilon,
                                      std::size_t k, std::uint64_t noise_seed,
                                      const attack::Perturbation* applied) {
  switch (kind) {
    case AttackKind::None:
      return {};
    case AttackKind::Random:
      return attack::noise_injector_factory(epsilon, noise_seed);
    case AttackKind::Fgsm:
      return attack::fgsm_injector_factory(q, epsilon);
    case AttackKind::Osfw:
      return attack::osfw_injector_factory(q, k, epsilon);
    default:
      if (applied == nullptr) throw std::invalid_argument("precomputed attack without a perturbation");
      return attack::injector_factory(*applied);
  }
}

AttackReport run_experiment(const ExperimentConfig& cfg, const agent::AgentCheckpoint& agent,
                            const attack::TrainSet& d, const ad3::DetectorModel* detector) {
  AttackReport report;
  report.env = agent.spec.name();
  report.attack = cfg.attack;
  report.episodes = cfg.episodes;
  report.seed_begin = cfg.seed_begin;
  report.collect_seed = cfg.collect_seed;
  report.clean_return = agent.clean_return;
  report.memory_rewrite = cfg.attack == AttackKind::Fgsm;
  report.has_detector = detector != nullptr;
  const auto seeds = agent::seed_range(cfg.seed_begin, cfg.episodes);

  for (double eps : cfg.epsilons) {
    AttackRow row;
    row.epsilon = eps;
    attack::AttackConfig acfg = cfg.attack_cfg;
    acfg.epsilon = eps;
    row.achieved_delta = kNaN;
    if (cfg.attack == AttackKind::Random || is_precomputed(cfg.attack)) {
      Generated g = in_stage(Stage::Generate, [&] { return generate(cfg.attack, agent.q, d, acfg, cfg.noise_seed); });
      row.perturbation = std::move(g.perturbation);
      row.achieved_delta = g.achieved_delta;
      row.reached_target = g.reached_target;
    }
    const attack::Perturbation* applied = row.perturbation ? &*row.perturbation : nullptr;
    row.fooling_rate = in_stage(Stage::Generate, [&] { return row_fooling_rate(cfg.attack, agent.q, d, eps, applied); });

    agent::EvaluationResult result = in_stage(Stage::Evaluate, [&] {
      const auto factory = attack_factory(cfg.attack, agent.q, eps, acfg.k, cfg.noise_seed, applied);
      return agent::evaluate(agent.q, agent.spec, cfg.episodes, seeds, factory, cfg.workers);
    });
    row.mean_return = result.mean_return;
    row.std_return = result.std_return;
    row.losing_rate = result.losing_rate;
    if (detector != nullptr) {
      in_stage(Stage::Detect, [&] {
        std::size_t lost = 0;
        for (const auto& t : result.traces) {
          const bool alarmed = ad3::monitor(*detector, t.actions).has_value();
          row.alarms += alarmed ? 1 : 0;
          if (!alarmed && t.terminal == env::Terminal::Lose) ++lost;
        }
        row.alarm_rate = static_cast<double>(row.alarms) / static_cast<double>(result.traces.size());
        row.losing_rate_suspended = static_cast<double>(lost) / static_cast<double>(result.traces.size());
      });
    }
    row.traces = std::move(result.traces);
    report.rows.push_back(std::move(row));
  }
  return report;
}

AttackReport run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const agent::AgentCheckpoint agent = in_stage(Stage::Load, [&] { return agent::load_agent(cfg.agent_path); });
  std::optional<ad3::DetectorModel> detector;
  if (cfg.detector_path) {
    detector = in_stage(Stage::Load, [&] { return ad3::load_model(*cfg.detector_path); });
  }
  const attack::TrainSet d =
      in_stage(Stage::Collect, [&] { return attack::collect_train_set(agent.q, agent.spec, cfg.collect_seed); });
  AttackReport report = run_experiment(cfg, agent, d, detector ? &*detector : nullptr);
  in_stage(Stage::Report, [&] { write_attack_report(cfg.output_dir, report, cfg.agent_path, d); });
  return report;
}

}  // namespace uaplab::bench

// Command-line front end: every pipeline stage is a subcommand.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include "uaplab/ad3/detector.hpp"
#include "uaplab/agentkit/agent_checkpoint.hpp"
#include "uaplab/agentkit/dqn.hpp"
#include "uaplab/attackforge/perturbation.hpp"
#include "uaplab/attackforge/train_set.hpp"
#include "uaplab/bench/detection.hpp"
#include "uaplab/bench/experiment.hpp"
#include "uaplab/bench/report.hpp"
#include "uaplab/bench/timing.hpp"

namespace fs = std::filesystem;
using namespace uaplab;

namespace {

void add_attack_options(CLI::App* cmd, attack::AttackConfig& a) {
  cmd->add_option("--delta-max", a.target_fooling_rate, "Target fooling rate")->capture_default_str();
  cmd->add_option("--it-max", a.max_iterations, "Outer pass cap")->capture_default_str();
  cmd->add_option("--max-inner", a.deepfool_max_inner, "DeepFool inner iteration cap")->capture_default_str();
  cmd->add_option("--overshoot", a.overshoot, "DeepFool overshoot")->capture_default_str();
  cmd->add_option("--k", a.k, "States averaged by OSFW and OSFW(U)")->capture_default_str();
  cmd->add_option("--alpha", a.alpha, "Value-drop margin for uap_cont (default: 1% of V range)");
  cmd->add_option("--attack-seed", a.seed, "Seed for optional shuffling")->capture_default_str();
  cmd->add_flag("--shuffle", a.shuffle, "Visit the train set in a seeded random order");
}

void add_detector_options(CLI::App* cmd, ad3::DetectorConfig& c, std::size_t& reference, bool& no_scale) {
  cmd->add_option("--k1", c.k1, "Learning episodes")->capture_default_str();
  cmd->add_option("--k2", c.k2, "Calibration episodes")->capture_default_str();
  cmd->add_option("--p", c.p, "Threshold percentile")->capture_default_str();
  cmd->add_option("--r", c.r, "Window exceedance fraction")->capture_default_str();
  cmd->add_option("--t1", c.t1, "Warm-up steps before scaling")->capture_default_str();
  cmd->add_option("--t2", c.t2, "Window length before scaling")->capture_default_str();
  cmd->add_option("--reference-length", reference, "Episode length the t1/t2 values are written for")
      ->capture_default_str();
  cmd->add_flag("--no-scale", no_scale, "Use t1/t2 as given");
}

int run(const std::function<void()>& body) {
  try {
    body();
    return 0;
  } catch (const bench::StageError& e) {
    std::cerr << "error [" << bench::to_string(e.stage()) << "]: " << e.what() << '\n';
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

agent::AgentCheckpoint load(const fs::path& p) {
  return bench::in_stage(bench::Stage::Load, [&] { return agent::load_agent(p); });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"uaplab: universal adversarial perturbations against deep RL agents"};
  app.set_config("--config", "", "INI or TOML file with option values (sections per subcommand)");
  app.require_subcommand(1);
  int status = 0;

  // train
  auto* train = app.add_subcommand("train", "Train a DQN agent and save its checkpoint");
  std::string env_name = "catch";
  fs::path agent_out;
  agent::TrainConfig tcfg;
  std::size_t progress_every = 2000;
  train->add_option("--env", env_name, "catch or corridor")->capture_default_str();
  train->add_option("--out", agent_out, "Checkpoint path")->required();
  train->add_option("--steps", tcfg.total_steps, "Environment decisions")->capture_default_str();
  train->add_option("--seed", tcfg.seed, "Training seed")->capture_default_str();
  train->add_option("--lr", tcfg.learning_rate, "Adam learning rate")->capture_default_str();
  train->add_option("--discount", tcfg.discount, "Discount factor")->capture_default_str();
  train->add_option("--batch", tcfg.batch_size, "Minibatch size")->capture_default_str();
  train->add_option("--eval-seed", tcfg.eval_seed_begin, "First evaluation seed")->capture_default_str();
  train->add_option("--eval-episodes", tcfg.eval_episodes, "Evaluation episodes")->capture_default_str();
  train->add_option("--progress", progress_every, "Print progress every n steps (0: quiet)")->capture_default_str();
  train->callback([&] {
    status = run([&] {
      const env::EnvSpec spec = bench::in_stage(bench::Stage::Config, [&] { return env::spec_by_name(env_name); });
      bench::in_stage(bench::Stage::Config, [&] { tcfg.validate(); });
      const auto agent = bench::in_stage(bench::Stage::Train, [&] {
        return agent::train_dqn(
            spec, tcfg, [](std::size_t step, double ret) { std::printf("step %zu  return %.2f\n", step, ret); },
            progress_every);
      });
      bench::in_stage(bench::Stage::Report, [&] { agent::save_agent(agent_out, agent); });
      std::printf("clean return %.2f over %zu episodes -> %s\n", agent.clean_return, agent.eval_episodes,
                  agent_out.string().c_str());
    });
  });

  // collect
  auto* collect = app.add_subcommand("collect", "Record the train set from one monitored episode");
  fs::path agent_path;
  fs::path set_out;
  std::uint64_t collect_seed = 1;
  collect->add_option("--agent", agent_path, "Agent checkpoint")->required()->check(CLI::ExistingFile);
  collect->add_option("--seed", collect_seed, "Episode seed")->capture_default_str();
  collect->add_option("--out", set_out, "Train set path")->required();
  collect->callback([&] {
    status = run([&] {
      const auto agent = load(agent_path);
      const auto d = bench::in_stage(bench::Stage::Collect, [&] { return attack::collect_train_set(agent.q, agent.spec, collect_seed); });
      bench::in_stage(bench::Stage::Report, [&] { attack::save_train_set(set_out, d); });
      std::printf("%zu states, %zu critical, beta %.6g\n", d.size(), d.sanitized().size(), d.beta);
    });
  });

  // attack-gen
  auto* gen = app.add_subcommand("attack-gen", "Generate an offline perturbation");
  fs::path set_path;
  fs::path pert_out;
  std::string attack_name = "uap_s";
  attack::AttackConfig gen_cfg;
  std::uint64_t noise_seed = 0;
  gen->add_option("--agent", agent_path, "Agent checkpoint")->required()->check(CLI::ExistingFile);
  gen->add_option("--train-set", set_path, "Train set from `collect`")->required()->check(CLI::ExistingFile);
  gen->add_option("--attack", attack_name, "uap_s, uap_o, uap_cont, osfw_u or random")->capture_default_str();
  gen->add_option("--epsilon", gen_cfg.epsilon, "l-infinity bound")->capture_default_str();
  gen->add_option("--noise-seed", noise_seed, "Seed for random noise")->capture_default_str();
  gen->add_option("--out", pert_out, "Perturbation path")->required();
  add_attack_options(gen, gen_cfg);
  gen->callback([&] {
    status = run([&] {
      const auto kind = bench::in_stage(bench::Stage::Config, [&] { return bench::parse_attack(attack_name); });
      if (!bench::is_precomputed(kind) && kind != bench::AttackKind::Random) {
        throw bench::StageError(bench::Stage::Config, attack_name + " is generated online; nothing to precompute");
      }
      const auto agent = load(agent_path);
      const auto d = bench::in_stage(bench::Stage::Load, [&] { return attack::load_train_set(set_path); });
      const auto g = bench::in_stage(bench::Stage::Generate, [&] { return bench::generate(kind, agent.q, d, gen_cfg, noise_seed); });
      const double fr = attack::fooling_rate(agent.q, d.states, g.perturbation);
      bench::in_stage(bench::Stage::Report, [&] {
        attack::save_perturbation(pert_out, g.perturbation, {attack_name, gen_cfg.seed, std::isnan(g.achieved_delta) ? fr : g.achieved_delta});
      });
      std::printf("%s: fooling rate %.3f on D_train", attack_name.c_str(), fr);
      if (!std::isnan(g.achieved_delta)) std::printf(", %.3f on the critical states", g.achieved_delta);
      std::printf("%s\n", g.reached_target ? "" : " (warning: target fooling rate not reached)");
    });
  });

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "Run an attack experiment over an epsilon sweep");
  bench::ExperimentConfig ecfg;
  std::string eval_attack = "none";
  fs::path detector_path;
  evaluate->add_option("--agent", ecfg.agent_path, "Agent checkpoint")->required();
  evaluate->add_option("--attack", eval_attack, "none, random, fgsm, osfw, osfw_u, uap_s, uap_o, uap_cont")
      ->capture_default_str();
  evaluate->add_option("--epsilon", ecfg.epsilons, "Epsilon values")->capture_default_str();
  evaluate->add_option("--episodes", ecfg.episodes, "Episodes per epsilon")->capture_default_str();
  evaluate->add_option("--seed", ecfg.seed_begin, "First episode seed")->capture_default_str();
  evaluate->add_option("--collect-seed", ecfg.collect_seed, "Seed of the monitored episode")->capture_default_str();
  evaluate->add_option("--noise-seed", ecfg.noise_seed, "Seed for random noise")->capture_default_str();
  evaluate->add_option("--detector", detector_path, "AD3 model for alarm statistics");
  evaluate->add_option("--workers", ecfg.workers, "Episode worker threads")->capture_default_str();
  evaluate->add_option("--out", ecfg.output_dir, "Report directory")->required();
  add_attack_options(evaluate, ecfg.attack_cfg);
  evaluate->callback([&] {
    status = run([&] {
      ecfg.attack = bench::in_stage(bench::Stage::Config, [&] { return bench::parse_attack(eval_attack); });
      if (!detector_path.empty()) ecfg.detector_path = detector_path;
      const auto report = bench::run_experiment(ecfg);
      std::printf("wrote %zu rows to %s\n", report.rows.size(), ecfg.output_dir.string().c_str());
      std::ifstream summary(ecfg.output_dir / "attack_summary.txt");
      std::cout << summary.rdbuf();
    });
  });

  // bench-timing
  auto* timing = app.add_subcommand("bench-timing", "Measure offline and online attack costs against T_max");
  bench::TimingConfig timing_cfg;
  fs::path timing_out;
  timing->add_option("--agent", agent_path, "Agent checkpoint")->required()->check(CLI::ExistingFile);
  timing->add_option("--collect-seed", collect_seed, "Seed of the monitored episode")->capture_default_str();
  timing->add_option("--epsilon", timing_cfg.epsilon, "l-infinity bound")->capture_default_str();
  timing->add_option("--reps", timing_cfg.reps, "Repetitions (>= 10)")->capture_default_str();
  timing->add_option("--forwards", timing_cfg.forward_passes, "Forward passes per repetition (>= 1000)")
      ->capture_default_str();
  timing->add_option("--out", timing_out, "Report directory")->required();
  add_attack_options(timing, timing_cfg.attack_cfg);
  timing->callback([&] {
    status = run([&] {
      const auto agent = load(agent_path);
      const auto d = bench::in_stage(bench::Stage::Collect, [&] { return attack::collect_train_set(agent.q, agent.spec, collect_seed); });
      const auto report = bench::in_stage(bench::Stage::Timing, [&] { return bench::bench_timing(agent, d, timing_cfg); });
      bench::in_stage(bench::Stage::Report, [&] { bench::write_timing_report(timing_out, report); });
      std::ifstream summary(timing_out / "timing_summary.txt");
      std::cout << summary.rdbuf();
    });
  });

  // detect-calibrate
  auto* calib = app.add_subcommand("detect-calibrate", "Learn and calibrate an AD3 model on clean episodes");
  bench::DetectorTraining training;
  std::size_t reference_length = 1600;
  bool no_scale = false;
  fs::path model_out;
  calib->add_option("--agent", agent_path, "Agent checkpoint")->required()->check(CLI::ExistingFile);
  calib->add_option("--learn-seed", training.learn_seed_begin, "First learning seed")->capture_default_str();
  calib->add_option("--calibrate-seed", training.calibrate_seed_begin, "First calibration seed")->capture_default_str();
  calib->add_option("--out", model_out, "Model path")->required();
  add_detector_options(calib, training.cfg, reference_length, no_scale);
  calib->callback([&] {
    status = run([&] {
      const auto agent = load(agent_path);
      if (!no_scale) training.cfg = training.cfg.scaled_to(agent.spec.horizon, reference_length);
      bench::in_stage(bench::Stage::Config, [&] { training.cfg.validate(); });
      const auto model = bench::in_stage(bench::Stage::Detect, [&] { return bench::train_detector(agent, training); });
      bench::in_stage(bench::Stage::Report, [&] { ad3::save_model(model_out, model); });
      std::printf("threshold %.6g (t1 %zu, t2 %zu) -> %s\n", model.threshold, model.cfg.t1, model.cfg.t2,
                  model_out.string().c_str());
    });
  });

  // detect-eval and losing-rate share their inputs
  bench::StudyConfig study_cfg;
  std::string study_attack = "uap_s";
  fs::path model_path;
  fs::path study_out;
  const auto add_study = [&](CLI::App* cmd) {
    cmd->add_option("--agent", agent_path, "Agent checkpoint")->required()->check(CLI::ExistingFile);
    cmd->add_option("--model", model_path, "AD3 model")->required()->check(CLI::ExistingFile);
    cmd->add_option("--attack", study_attack, "Attack applied to the attacked episodes")->capture_default_str();
    cmd->add_option("--epsilon", study_cfg.epsilon, "l-infinity bound")->capture_default_str();
    cmd->add_option("--clean-episodes", study_cfg.clean_episodes, "Clean episodes")->capture_default_str();
    cmd->add_option("--attacked-episodes", study_cfg.attacked_episodes, "Attacked episodes")->capture_default_str();
    cmd->add_option("--clean-seed", study_cfg.clean_seed_begin, "First clean seed")->capture_default_str();
    cmd->add_option("--attacked-seed", study_cfg.attacked_seed_begin, "First attacked seed")->capture_default_str();
    cmd->add_option("--collect-seed", study_cfg.collect_seed, "Seed of the monitored episode")->capture_default_str();
    cmd->add_option("--workers", study_cfg.workers, "Episode worker threads")->capture_default_str();
    cmd->add_option("--out", study_out, "Report directory")->required();
    add_attack_options(cmd, study_cfg.attack_cfg);
  };
  const auto run_study = [&](bool losing_only) {
    status = run([&] {
      study_cfg.attack = bench::in_stage(bench::Stage::Config, [&] { return bench::parse_attack(study_attack); });
      const auto agent = load(agent_path);
      const auto model = bench::in_stage(bench::Stage::Load, [&] { return ad3::load_model(model_path); });
      if (losing_only && !agent.spec.win_lose_terminal) {
        throw bench::StageError(bench::Stage::Config, "losing rate needs a game with win/lose terminals");
      }
      const auto study = bench::detection_study(agent, model, study_cfg);
      bench::in_stage(bench::Stage::Report, [&] { bench::write_detection_report(study_out, study, study_cfg); });
      std::ifstream summary(study_out / "detection_summary.txt");
      std::cout << summary.rdbuf();
    });
  };
  auto* deval = app.add_subcommand("detect-eval", "Precision and recall of AD3 on clean and attacked episodes");
  add_study(deval);
  deval->callback([&] { run_study(false); });
  auto* losing = app.add_subcommand("losing-rate", "Losing rate with and without AD3 suspension");
  add_study(losing);
  losing->callback([&] { run_study(true); });

  // report-check
  auto* check = app.add_subcommand("report-check", "Recompute report rows from emitted traces and perturbations");
  fs::path report_dir;
  check->add_option("--dir", report_dir, "Report directory from `evaluate`")->required()->check(CLI::ExistingDirectory);
  check->callback([&] {
    status = run([&] {
      const auto result = bench::in_stage(bench::Stage::Report, [&] { return bench::check_report(report_dir); });
      for (const auto& p : result.problems) std::cerr << p << '\n';
      if (!result.ok()) throw bench::StageError(bench::Stage::Report, std::to_string(result.problems.size()) + " inconsistencies");
      std::printf("%zu rows consistent\n", result.rows_checked);
    });
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  return status;
}

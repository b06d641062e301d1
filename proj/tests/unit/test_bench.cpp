#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "support/fixtures.hpp"
#include "uaplab/agentkit/dqn.hpp"
#include "uaplab/bench/detection.hpp"
#include "uaplab/bench/experiment.hpp"
#include "uaplab/bench/report.hpp"
#include "uaplab/bench/timing.hpp"

namespace {

using namespace uaplab;
namespace fs = std::filesystem;

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("uaplab_test_bench_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

// A small untrained agent on a short-horizon catch, enough to exercise the
// whole pipeline quickly.
fs::path small_agent(const fs::path& dir) {
  env::EnvSpec spec = env::catch_spec();
  spec.horizon = 40;
  agent::AgentCheckpoint a;
  a.spec = spec;
  a.q = agent::make_q_network(spec, 3);
  a.training_seed = 3;
  a.eval_seed_begin = 1000;
  a.eval_episodes = 2;
  const auto seeds = agent::seed_range(1000, 2);
  a.clean_return = agent::evaluate(a.q, spec, 2, seeds).mean_return;
  const fs::path p = dir / "agent.ckpt";
  agent::save_agent(p, a);
  return p;
}

int run_cli(const std::string& args) {
  const int status = std::system((std::string(UAPLAB_CLI) + " " + args + " >/dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST(PrecisionRecall, NoAlarmsNoAttacks) {
  const auto pr = bench::precision_recall({false, false, false}, {false, false, false});
  EXPECT_EQ(pr.precision, 1.0);
  EXPECT_EQ(pr.recall, 1.0);
  EXPECT_TRUE(pr.precision_undefined);
  EXPECT_TRUE(pr.recall_undefined);
}

TEST(PrecisionRecall, PerfectSplit) {
  std::vector<bool> attacked(20, false);
  for (std::size_t i = 10; i < 20; ++i) attacked[i] = true;
  const auto pr = bench::precision_recall(attacked, attacked);
  EXPECT_EQ(pr.precision, 1.0);
  EXPECT_EQ(pr.recall, 1.0);
  EXPECT_EQ(pr.tp, 10u);
  EXPECT_EQ(pr.tn, 10u);
  EXPECT_FALSE(pr.precision_undefined);
  EXPECT_FALSE(pr.recall_undefined);
}

TEST(PrecisionRecall, MixedCounts) {
  const auto pr = bench::precision_recall({true, true, true, false, false}, {true, false, true, true, false});
  EXPECT_EQ(pr.tp, 2u);
  EXPECT_EQ(pr.fp, 1u);
  EXPECT_EQ(pr.fn, 1u);
  EXPECT_EQ(pr.tn, 1u);
  EXPECT_DOUBLE_EQ(pr.precision, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(pr.recall, 2.0 / 3.0);
  EXPECT_THROW(bench::precision_recall({true}, {true, false}), std::invalid_argument);
}

TEST(Timing, FrameBudget) {
  EXPECT_NEAR(bench::frame_budget(60.0, 0.0007), 1.0 / 60.0 - 0.0007, 1e-15);
  EXPECT_NEAR(bench::frame_budget(60.0, 0.0007), 0.01597, 5e-6);
  EXPECT_THROW(bench::frame_budget(0.0, 0.001), std::invalid_argument);
}

TEST(Timing, Summary) {
  const auto s = bench::summarize_times({3.0, 1.0, 2.0, 10.0});
  EXPECT_DOUBLE_EQ(s.mean, 4.0);
  EXPECT_DOUBLE_EQ(s.median, 2.5);
  EXPECT_DOUBLE_EQ(s.stddev, std::sqrt((1.0 + 9.0 + 4.0 + 36.0) / 4.0));
  EXPECT_EQ(s.reps, 4u);
}

TEST(Timing, ConfigFloors) {
  bench::TimingConfig cfg;
  cfg.reps = 9;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.forward_passes = 999;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
}

TEST(Timing, ReportIsConsistent) {
  const fs::path dir = scratch_dir("timing");
  const auto a = agent::load_agent(small_agent(dir));
  const auto d = attack::collect_train_set(a.q, a.spec, 1);
  bench::TimingConfig cfg;
  cfg.attacks = {bench::AttackKind::UapS, bench::AttackKind::Osfw};
  cfg.attack_cfg.max_iterations = 1;
  const auto report = bench::bench_timing(a, d, cfg);
  EXPECT_TRUE(report.consistent());
  EXPECT_NEAR(report.t_max, 1.0 / 60.0 - report.response_time, 1e-12);
  ASSERT_EQ(report.attacks.size(), 2u);
  for (const auto& t : report.attacks) {
    EXPECT_GE(t.apply.reps, 10u);
    EXPECT_EQ(t.realtime_feasible, t.online.mean < report.t_max);
  }
  bench::write_timing_report(dir, report);
  EXPECT_EQ(slurp(dir / "timing_report.tsv").rfind("# nondeterministic", 0), 0u);
  fs::remove_all(dir);
}

TEST(Attack, NamesRoundTrip) {
  for (auto k : {bench::AttackKind::None, bench::AttackKind::Random, bench::AttackKind::Fgsm, bench::AttackKind::Osfw,
                 bench::AttackKind::OsfwU, bench::AttackKind::UapS, bench::AttackKind::UapO,
                 bench::AttackKind::UapCont}) {
    EXPECT_EQ(bench::parse_attack(bench::to_string(k)), k);
  }
  EXPECT_THROW(bench::parse_attack("pgd"), std::invalid_argument);
  EXPECT_EQ(bench::default_epsilons(), (std::vector<double>{0.004, 0.006, 0.01, 0.02, 0.05}));
}

TEST(Stage, ErrorsCarryTheirStage) {
  try {
    bench::in_stage(bench::Stage::Generate, []() -> int { throw std::runtime_error("boom"); });
    FAIL();
  } catch (const bench::StageError& e) {
    EXPECT_EQ(e.stage(), bench::Stage::Generate);
    EXPECT_EQ(e.exit_code(), 6);
    EXPECT_NE(std::string(e.what()).find("boom"), std::string::npos);
  }
}

TEST(Experiment, ValidationIsAConfigStageError) {
  bench::ExperimentConfig cfg;
  cfg.agent_path = "/nonexistent/agent.ckpt";
  cfg.output_dir = "/tmp/x";
  try {
    cfg.validate();
    FAIL();
  } catch (const bench::StageError& e) {
    EXPECT_EQ(e.stage(), bench::Stage::Config);
  }
  const fs::path dir = scratch_dir("validate");
  cfg.agent_path = small_agent(dir);
  cfg.epsilons = {0.01, -0.5};
  EXPECT_THROW(cfg.validate(), bench::StageError);
  fs::remove_all(dir);
}

TEST(Experiment, NoneMatchesCleanEvaluation) {
  const fs::path dir = scratch_dir("none");
  bench::ExperimentConfig cfg;
  cfg.agent_path = small_agent(dir);
  cfg.attack = bench::AttackKind::None;
  cfg.epsilons = {0.01};
  cfg.episodes = 2;
  cfg.output_dir = dir / "out";
  const auto report = bench::run_experiment(cfg);
  const auto a = agent::load_agent(cfg.agent_path);
  const auto seeds = agent::seed_range(cfg.seed_begin, 2);
  const auto clean = agent::evaluate(a.q, a.spec, 2, seeds);
  ASSERT_EQ(report.rows.size(), 1u);
  EXPECT_EQ(report.rows[0].mean_return, clean.mean_return);
  EXPECT_EQ(report.rows[0].traces, clean.traces);
  EXPECT_TRUE(std::isnan(report.rows[0].fooling_rate));
  fs::remove_all(dir);
}

TEST(Report, ByteIdenticalAcrossRunsAndSelfConsistent) {
  const fs::path dir = scratch_dir("determinism");
  bench::ExperimentConfig cfg;
  cfg.agent_path = small_agent(dir);
  cfg.attack = bench::AttackKind::UapS;
  cfg.epsilons = {0.02, 0.05};
  cfg.episodes = 2;
  cfg.attack_cfg.max_iterations = 2;
  cfg.output_dir = dir / "a";
  const auto first = bench::run_experiment(cfg);
  EXPECT_EQ(first.rows.size(), cfg.epsilons.size());
  cfg.output_dir = dir / "b";
  bench::run_experiment(cfg);
  for (const auto& entry : fs::recursive_directory_iterator(dir / "a")) {
    if (!entry.is_regular_file()) continue;
    const fs::path rel = fs::relative(entry.path(), dir / "a");
    ASSERT_TRUE(fs::exists(dir / "b" / rel)) << rel;
    EXPECT_EQ(slurp(entry.path()), slurp(dir / "b" / rel)) << rel;
  }
  const auto check = bench::check_report(dir / "a");
  EXPECT_TRUE(check.ok()) << (check.problems.empty() ? "" : check.problems.front());
  EXPECT_EQ(check.rows_checked, 2u);

  // Tampering with a trace is caught.
  const fs::path trace = dir / "a" / "traces" / "row_0" / "seed_1000.trace";
  ASSERT_TRUE(fs::exists(trace));
  auto trace_data = env::load_trace(trace);
  trace_data.rewards.back() += 1.0;
  trace_data.total_return += 1.0;
  env::save_trace(trace, trace_data);
  EXPECT_FALSE(bench::check_report(dir / "a").ok());
  fs::remove_all(dir);
}

TEST(Report, RealsSurviveText) {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 42.0}) EXPECT_EQ(bench::parse_real(bench::format_real(v)), v);
  EXPECT_TRUE(std::isnan(bench::parse_real(bench::format_real(std::nan("")))));
}

TEST(Cli, StageExitCodes) {
  const fs::path dir = scratch_dir("cli");
  EXPECT_EQ(run_cli("evaluate --agent /nonexistent/agent.ckpt --out " + (dir / "o").string()), 2);
  std::ofstream(dir / "junk.ckpt") << "definitely not a checkpoint";
  EXPECT_EQ(run_cli("evaluate --agent " + (dir / "junk.ckpt").string() + " --out " + (dir / "o").string()), 3);
  EXPECT_EQ(run_cli("evaluate --agent " + (dir / "junk.ckpt").string() + " --attack pgd --out " + (dir / "o").string()), 2);
  EXPECT_NE(run_cli("no-such-command"), 0);
  fs::remove_all(dir);
}

TEST(Cli, ConfigFileSetsOptions) {
  const fs::path dir = scratch_dir("cli_config");
  const fs::path agent = small_agent(dir);
  {
    std::ofstream cfg(dir / "run.ini");
    cfg << "[evaluate]\nagent = \"" << agent.string() << "\"\nattack = \"random\"\nepsilon = [0.01]\n"
        << "episodes = 2\nout = \"" << (dir / "out").string() << "\"\n";
  }
  EXPECT_EQ(run_cli("--config " + (dir / "run.ini").string() + " evaluate"), 0);
  EXPECT_TRUE(fs::exists(dir / "out" / "attack_report.tsv"));
  EXPECT_EQ(run_cli("report-check --dir " + (dir / "out").string()), 0);
  fs::remove_all(dir);
}

}  // namespace

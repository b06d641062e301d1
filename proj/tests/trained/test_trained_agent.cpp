#include <gtest/gtest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>

#include "support/fixtures.hpp"
#include "uaplab/agentkit/evaluate.hpp"
#include "uaplab/agentkit/oracle.hpp"
#include "uaplab/agentkit/policy.hpp"
#include "uaplab/attackforge/gradient_sign.hpp"
#include "uaplab/attackforge/injectors.hpp"
#include "uaplab/attackforge/uap.hpp"
#include "uaplab/bench/detection.hpp"
#include "uaplab/bench/timing.hpp"
#include "uaplab/envlab/environment.hpp"

namespace {

using namespace uaplab;
using bench::AttackKind;
namespace fs = std::filesystem;

const agent::AgentCheckpoint& victim() { return testkit::trained_catch_agent().agent; }

std::vector<std::uint64_t> eval_seeds() { return agent::seed_range(1000, 10); }

double clean_return() { return agent::evaluate(victim().q, victim().spec, 10, eval_seeds()).mean_return; }

TEST(TrainedAgent, RecordedCleanReturnIsReproduced) {
  const auto& a = victim();
  const auto seeds = agent::seed_range(a.eval_seed_begin, a.eval_episodes);
  EXPECT_EQ(agent::evaluate(a.q, a.spec, seeds.size(), seeds).mean_return, a.clean_return);
  const fs::path tmp = fs::temp_directory_path() / ("uaplab_agent_" + std::to_string(::getpid()) + ".ckpt");
  agent::save_agent(tmp, a);
  const auto back = agent::load_agent(tmp);
  fs::remove(tmp);
  EXPECT_TRUE(back == a);
  EXPECT_EQ(agent::evaluate(back.q, back.spec, seeds.size(), seeds).mean_return, a.clean_return);
}

TEST(TrainedAgent, CatchesAtLeastNinetyPercentOfBalls) {
  const auto& a = victim();
  std::size_t caught = 0;
  std::size_t drops = 0;
  for (std::uint64_t seed : eval_seeds()) {
    env::Environment e(a.spec);
    e.reset(seed);
    while (!e.done()) e.step(agent::act_greedy(a.q, e.state()));
    const auto& game = dynamic_cast<const env::CatchGame&>(e.game());
    caught += game.caught();
    drops += game.drops();
  }
  EXPECT_GE(static_cast<double>(caught), 0.9 * static_cast<double>(drops)) << caught << " of " << drops;
}

TEST(TrainedAgent, CleanEpisodesAreNeverLost) {
  EXPECT_EQ(agent::evaluate(victim().q, victim().spec, 10, eval_seeds()).losing_rate, 0.0);
}

TEST(TrainSet, CollectedFromOneMonitoredEpisode) {
  const auto& d = testkit::catch_train_set();
  EXPECT_EQ(d.size(), victim().spec.horizon);
  d.validate();
  EXPECT_GT(d.sanitized().size(), 0u);
  EXPECT_LT(d.sanitized().size(), d.size());
}

TEST(Attacks, RandomNoiseAtOnePercentBarelyHurts) {
  const auto report = testkit::run_catch_attack(AttackKind::Random, {0.01});
  EXPECT_GE(report.rows[0].mean_return, 0.8 * clean_return());
}

TEST(Attacks, FgsmFlipsMostCriticalStates) {
  const auto& d = testkit::catch_train_set();
  std::size_t flipped = 0;
  const auto critical = d.sanitized();
  for (const auto& s : critical) {
    const auto r = attack::fgsm(victim().q, s, 0.05);
    flipped += agent::act_greedy(victim().q, attack::perturb_state(s, r.storage())) != agent::act_greedy(victim().q, s);
  }
  EXPECT_GE(static_cast<double>(flipped), 0.7 * static_cast<double>(critical.size()))
      << flipped << " of " << critical.size();
}

TEST(Attacks, UapSFoolsHalfOfTheSanitizedSet) {
  attack::AttackConfig cfg;
  cfg.epsilon = 0.05;
  const auto res = attack::uap_s(victim().q, testkit::catch_train_set().sanitized(), cfg);
  EXPECT_GE(res.fooling_rate, 0.5);
  EXPECT_LE(res.perturbation.max_abs(), 0.05);
}

TEST(Attacks, UapOBeatsRandomNoise) {
  const double uap_o = testkit::run_catch_attack(AttackKind::UapO, {0.05}).rows[0].mean_return;
  const double noise = testkit::run_catch_attack(AttackKind::Random, {0.05}).rows[0].mean_return;
  EXPECT_LE(uap_o, noise);
}

TEST(Attacks, OsfwUDegradesEveryFreshEpisode) {
  const auto attacked = testkit::run_catch_attack(AttackKind::OsfwU, {0.05}).rows[0];
  const auto clean = agent::evaluate(victim().q, victim().spec, 10, eval_seeds());
  for (std::size_t i = 0; i < 10; ++i) {
    EXPECT_LT(attacked.traces[i].total_return, clean.traces[i].total_return) << "seed " << clean.traces[i].seed;
  }
}

TEST(Attacks, UapSSweepIsMonotoneUpToOneInversion) {
  const auto report = testkit::run_catch_attack(AttackKind::UapS, {0.01, 0.02, 0.05});
  std::size_t inversions = 0;
  for (std::size_t i = 1; i < report.rows.size(); ++i) {
    inversions += report.rows[i].mean_return > report.rows[i - 1].mean_return ? 1 : 0;
  }
  EXPECT_LE(inversions, 1u);
  EXPECT_EQ(report.rows.size(), 3u);
}

TEST(Attacks, NoneReportEqualsCleanEvaluation) {
  const auto row = testkit::run_catch_attack(AttackKind::None, {0.05}).rows[0];
  EXPECT_EQ(row.mean_return, clean_return());
}

TEST(Timing, PrecomputedApplyFitsTheFrameBudget) {
  bench::TimingConfig cfg;
  cfg.attacks = {AttackKind::UapS, AttackKind::Osfw};
  const auto report = bench::bench_timing(victim(), testkit::catch_train_set(), cfg);
  EXPECT_TRUE(report.consistent());
  const auto& uap = report.attacks[0];
  const auto& osfw = report.attacks[1];
  EXPECT_LT(uap.apply.mean, report.t_max);
  EXPECT_TRUE(uap.realtime_feasible);
  EXPECT_GE(osfw.online.mean, 10.0 * osfw.apply.mean);
  if (osfw.online.mean > report.t_max) {
    EXPECT_FALSE(osfw.realtime_feasible);
  }
}

TEST(Detection, CleanQuietAttackedAlarmed) {
  const auto training = bench::default_detector_training(victim().spec);
  EXPECT_EQ(training.cfg.t1, 80u);
  EXPECT_EQ(training.cfg.t2, 40u);
  const auto model = bench::train_detector(victim(), training);
  const auto study = bench::detection_study(victim(), model, bench::StudyConfig{});
  EXPECT_GE(study.scores.precision, 0.9);
  EXPECT_GE(study.scores.recall, 0.9);
  for (const auto& e : study.episodes) {
    if (e.alarm) {
      EXPECT_GT(*e.alarm, training.cfg.t1);
    }
    if (e.attacked) continue;
    EXPECT_FALSE(e.alarm) << "clean seed " << e.trace.seed;
  }
  EXPECT_EQ(study.clean_losing_rate, 0.0);
  EXPECT_EQ(study.clean_losing_rate_suspended, 0.0);
  EXPECT_EQ(study.losing_rate_no_defense, 1.0);
  EXPECT_EQ(study.losing_rate_suspended, 0.0);
}

int run_cli(const std::string& args) {
  const int status = std::system((std::string(UAPLAB_CLI) + " " + args + " >/dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST(Cli, OfflinePipelineEndToEnd) {
  const fs::path dir = fs::temp_directory_path() / ("uaplab_cli_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  const fs::path agent = dir / "agent.ckpt";
  agent::save_agent(agent, victim());
  ASSERT_EQ(run_cli("collect --agent " + agent.string() + " --out " + (dir / "d.bin").string()), 0);
  ASSERT_EQ(run_cli("attack-gen --agent " + agent.string() + " --train-set " + (dir / "d.bin").string() +
                    " --attack osfw_u --epsilon 0.05 --out " + (dir / "r.uapp").string()),
            0);
  const auto r = attack::load_perturbation(dir / "r.uapp");
  EXPECT_TRUE(r.perturbation == attack::osfw_u(victim().q, testkit::catch_train_set(), 16, 0.05));
  ASSERT_EQ(run_cli("evaluate --agent " + agent.string() + " --attack osfw_u --epsilon 0.05 --episodes 3 --out " +
                    (dir / "report").string()),
            0);
  EXPECT_EQ(run_cli("report-check --dir " + (dir / "report").string()), 0);
  fs::remove_all(dir);
}

}  // namespace

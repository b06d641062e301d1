// One line per acceptance criterion; exit status 1 when any fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "support/fixtures.hpp"
#include "support/oracles.hpp"
#include "uaplab/ad3/capd.hpp"
#include "uaplab/ad3/detector.hpp"
#include "uaplab/agentkit/evaluate.hpp"
#include "uaplab/agentkit/oracle.hpp"
#include "uaplab/attackforge/continuous.hpp"
#include "uaplab/attackforge/gradient_sign.hpp"
#include "uaplab/attackforge/uap.hpp"
#include "uaplab/bench/detection.hpp"
#include "uaplab/bench/timing.hpp"

namespace {

using namespace uaplab;
using bench::AttackKind;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* pattern, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, pattern, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

const agent::AgentCheckpoint& victim() { return testkit::trained_catch_agent().agent; }

std::vector<std::uint64_t> eval_seeds() { return agent::seed_range(1000, 10); }

double clean_return() {
  static const double r = agent::evaluate(victim().q, victim().spec, 10, eval_seeds()).mean_return;
  return r;
}

Outcome gradients() {
  const auto start = std::chrono::steady_clock::now();
  const auto stats = testkit::run_gradient_checks(100, 2024);
  const double took = seconds_since(start);
  const double worst = std::max(stats.max_input_error, stats.max_param_error);
  return {stats.nets >= 100 && worst < 1e-4 && took < 30.0,
          fmt("%zu nets, max relative error input %.2e params %.2e, %.1f s", stats.nets, stats.max_input_error,
              stats.max_param_error, took)};
}

Outcome projection_oracle() {
  const auto start = std::chrono::steady_clock::now();
  const auto stats = testkit::run_projection_checks(50, 2025);
  const double took = seconds_since(start);
  const double worst = std::max(stats.max_direction_error, stats.max_value_error);
  return {stats.instances >= 50 && worst < 1e-6 && took < 60.0,
          fmt("%zu instances, max direction error %.2e, max value error %.2e, %.2f s", stats.instances,
              stats.max_direction_error, stats.max_value_error, took)};
}

Outcome reductions() {
  num::Rng rng(2026);
  std::size_t uap_equal = 0;
  std::size_t osfw_equal = 0;
  constexpr std::size_t kTrials = 10;
  for (std::size_t trial = 0; trial < kTrials; ++trial) {
    const auto net = testkit::random_network(rng, {1, 6, 6}, 3, true);
    std::vector<num::Tensor> states;
    for (int i = 0; i < 12; ++i) states.push_back(testkit::random_tensor(rng, {1, 6, 6}, 0.1, 0.9));
    attack::AttackConfig cfg;
    cfg.epsilon = 0.1;
    const auto s = attack::uap_s(net, states, cfg);
    const auto o = attack::uap_o(net, states, cfg);
    uap_equal += s.perturbation.as_state() == o.perturbation.as_state() ? 1 : 0;

    const auto net4 = testkit::random_network(rng, {4, 6, 6}, 3, true);
    const auto d = attack::build_train_set(net4, {testkit::random_tensor(rng, {4, 6, 6}, 0, 1)});
    osfw_equal += attack::osfw_u(net4, d, 1, 0.05).storage() == attack::fgsm(net4, d.states[0], 0.05).storage() ? 1 : 0;
  }
  // The trained agent too: its first collected state alone.
  const auto& full = testkit::catch_train_set();
  const auto one = attack::build_train_set(victim().q, {full.states.front()});
  const bool agent_equal =
      attack::osfw_u(victim().q, one, 1, 0.05).storage() == attack::fgsm(victim().q, one.states[0], 0.05).storage();
  return {uap_equal == kTrials && osfw_equal == kTrials && agent_equal,
          fmt("N=1 uap_s==uap_o %zu/%zu, k=1 osfw_u==fgsm %zu/%zu (+ trained agent %s)", uap_equal, kTrials,
              osfw_equal, kTrials, agent_equal ? "equal" : "differs")};
}

Outcome competence() {
  const auto& t = testkit::trained_catch_agent();
  const double oracle = agent::evaluate_oracle(victim().spec, eval_seeds()).mean_return;
  const double agent = clean_return();
  return {agent >= 0.9 * oracle && t.seconds_to_train < 600.0,
          fmt("agent return %.1f vs oracle %.1f (%.1f%%), trained in %.1f s", agent, oracle, 100.0 * agent / oracle,
              t.seconds_to_train)};
}

double attacked_return(AttackKind kind, double eps) {
  return testkit::run_catch_attack(kind, {eps}).rows[0].mean_return;
}

Outcome effectiveness() {
  const double clean = clean_return();
  const double fgsm = attacked_return(AttackKind::Fgsm, 0.05);
  const double uap = attacked_return(AttackKind::UapS, 0.05);
  const double noise = attacked_return(AttackKind::Random, 0.05);
  return {fgsm <= uap && uap <= noise && uap <= 0.5 * clean && noise >= 0.8 * clean,
          fmt("clean %.1f, FGSM %.1f, UAP-S %.1f, random %.1f at eps 0.05", clean, fgsm, uap, noise)};
}

Outcome universality() {
  const double clean = clean_return();
  const double osfw_u = attacked_return(AttackKind::OsfwU, 0.05);
  const double uap = attacked_return(AttackKind::UapS, 0.05);
  const auto drop = [clean](double r) { return (clean - r) / std::abs(clean); };
  return {drop(osfw_u) >= 0.3 && drop(uap) >= 0.3,
          fmt("one perturbation from seed-1 episode, 10 fresh seeds: OSFW(U) %.1f (drop %.0f%%), UAP-S %.1f (drop %.0f%%)",
              osfw_u, 100 * drop(osfw_u), uap, 100 * drop(uap))};
}

Outcome realtime() {
  const auto report = bench::bench_timing(victim(), testkit::catch_train_set(), bench::TimingConfig{});
  bool apply_ok = true;
  double worst_apply = 0.0;
  double osfw_generation = 0.0;
  double osfw_apply = 0.0;
  for (const auto& a : report.attacks) {
    if (bench::is_precomputed(a.attack)) {
      apply_ok = apply_ok && a.apply.mean < report.t_max;
      worst_apply = std::max(worst_apply, a.apply.mean);
    }
    if (a.attack == AttackKind::Osfw) {
      osfw_generation = a.online.mean;
      osfw_apply = a.apply.mean;
    }
  }
  const bool ratio_ok = osfw_apply > 0.0 && osfw_generation >= 10.0 * osfw_apply;
  return {apply_ok && ratio_ok && report.consistent(),
          fmt("T_max %.6f s, worst precomputed apply %.2e s, OSFW generation %.2e s = %.0fx its apply", report.t_max,
              worst_apply, osfw_generation, osfw_apply > 0 ? osfw_generation / osfw_apply : 0.0)};
}

bool kl_property_suite() {
  num::Rng rng(2027);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 2 + num::uniform_index(rng, 4);
    std::vector<double> p(n);
    std::vector<double> q(n);
    double sp = 0;
    double sq = 0;
    for (std::size_t i = 0; i < n; ++i) {
      sp += p[i] = num::uniform(rng, 1e-3, 1.0);
      sq += q[i] = num::uniform(rng, 1e-3, 1.0);
    }
    for (std::size_t i = 0; i < n; ++i) {
      p[i] /= sp;
      q[i] /= sq;
    }
    if (!(ad3::kl_divergence(p, q) >= 0.0) || ad3::kl_divergence(p, p) != 0.0) return false;
  }
  return true;
}

bool online_offline_suite(const ad3::DetectorModel& model, const std::vector<bench::LabeledEpisode>& episodes) {
  for (const auto& e : episodes) {
    ad3::Monitor m(model);
    ad3::Capd batch(model.learned.actions(), model.learned.smoothing());
    for (std::size_t t = 0; t < e.trace.actions.size(); ++t) {
      m.push(e.trace.actions[t]);
      if (t > 0) batch.add(e.trace.actions[t - 1], e.trace.actions[t]);
      if (!(m.current() == batch)) return false;
    }
    if (m.alarm() != e.alarm) return false;
  }
  return true;
}

struct DetectionResults {
  bench::DetectionStudy study;
  bool kl_ok = false;
  bool equivalence_ok = false;
};

const DetectionResults& detection() {
  static const DetectionResults r = [] {
    DetectionResults out;
    const auto training = bench::default_detector_training(victim().spec);
    const auto model = bench::train_detector(victim(), training);
    out.study = bench::detection_study(victim(), model, bench::StudyConfig{});
    out.kl_ok = kl_property_suite();
    out.equivalence_ok = online_offline_suite(model, out.study.episodes);
    return out;
  }();
  return r;
}

Outcome detector_quality() {
  const auto& r = detection();
  const auto& s = r.study.scores;
  return {s.precision >= 0.9 && s.recall >= 0.9 && r.kl_ok && r.equivalence_ok,
          fmt("precision %.2f, recall %.2f (tp %zu fp %zu fn %zu tn %zu); KL suite %s; online/offline CAPD %s",
              s.precision, s.recall, s.tp, s.fp, s.fn, s.tn, r.kl_ok ? "ok" : "FAILED",
              r.equivalence_ok ? "ok" : "FAILED")};
}

Outcome losing_rate() {
  const auto& s = detection().study;
  return {s.losing_rate_no_defense == 1.0 && s.losing_rate_suspended == 0.0,
          fmt("attacked: no defense %.2f, AD3 suspension %.2f; clean: %.2f / %.2f", s.losing_rate_no_defense,
              s.losing_rate_suspended, s.clean_losing_rate, s.clean_losing_rate_suspended)};
}

Outcome continuous_control() {
  num::Rng rng(2028);
  std::vector<num::Tensor> states;
  for (int i = 0; i < 50; ++i) states.push_back(testkit::random_tensor(rng, {4, 4}, 0.1, 0.9));
  const testkit::QuadraticValue v({4, 4});
  attack::AttackConfig cfg;
  cfg.epsilon = 0.05;
  cfg.max_iterations = 10;
  cfg.alpha = 0.05;  // the best universal drop is at least 2 * eps * 16 * 0.1 = 0.16
  const auto feasible = attack::uap_continuous(v, states, cfg);
  cfg.alpha = 5.0;  // above the largest drop any |r| <= eps can give: 2 * eps * 16 * 0.9 + 16 eps^2 = 1.48
  const auto infeasible = attack::uap_continuous(v, states, cfg);
  return {feasible.uap.fooling_rate >= 0.95 && feasible.uap.passes <= 10 && infeasible.uap.fooling_rate == 0.0 &&
              infeasible.uap.warning(),
          fmt("feasible alpha: delta %.2f after %zu passes; infeasible alpha: delta %.2f, warning %s",
              feasible.uap.fooling_rate, feasible.uap.passes, infeasible.uap.fooling_rate,
              infeasible.uap.warning() ? "set" : "missing")};
}

Outcome guarded(const std::function<Outcome()>& f) {
  try {
    return f();
  } catch (const std::exception& e) {
    return {false, std::string("error: ") + e.what()};
  }
}

}  // namespace

int main() {
  attack::reset_clamp_audit();
  std::vector<Outcome> results(12);
  const std::vector<std::pair<int, std::function<Outcome()>>> order{
      {1, gradients},         {2, projection_oracle}, {3, reductions}, {5, competence},
      {6, effectiveness},     {7, universality},      {8, realtime},   {9, detector_quality},
      {10, losing_rate},      {11, continuous_control}};
  for (const auto& [n, f] : order) results[n] = guarded(f);
  // Every attack above clamps through the same audited path.
  const auto audit = attack::clamp_audit();
  results[4] = {audit.checks > 0 && audit.violations == 0,
                fmt("%llu bound checks across all attack runs, %llu violations",
                    static_cast<unsigned long long>(audit.checks), static_cast<unsigned long long>(audit.violations))};

  bool all = true;
  for (int n = 1; n <= 11; ++n) {
    std::printf("criterion %d: %s - %s\n", n, results[n].pass ? "PASS" : "FAIL", results[n].detail.c_str());
    all = all && results[n].pass;
  }
  return all ? 0 : 1;
}

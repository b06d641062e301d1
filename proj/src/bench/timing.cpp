#include "uaplab/bench/timing.hpp"

#include <sched.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "uaplab/agentkit/policy.hpp"
#include "uaplab/attackforge/gradient_sign.hpp"
#include "uaplab/attackforge/injectors.hpp"
#include "uaplab/bench/report.hpp"

namespace uaplab::bench {
namespace {

using Clock = std::chrono::steady_clock;

template <class F>
double seconds(F&& f) {
  const auto start = Clock::now();
  f();
  return std::chrono::duration<double>(Clock::now() - start).count();
}

bool pin_to_one_cpu() {
  cpu_set_t current;
  CPU_ZERO(&current);
  if (sched_getaffinity(0, sizeof current, &current) != 0) return false;
  for (int c = 0; c < CPU_SETSIZE; ++c) {
    if (CPU_ISSET(c, &current)) {
      cpu_set_t one;
      CPU_ZERO(&one);
      CPU_SET(c, &one);
      return sched_setaffinity(0, sizeof one, &one) == 0;
    }
  }
  return false;
}

class AffinityGuard {
 public:
  explicit AffinityGuard(bool pin) {
    if (!pin) return;
    saved_ok_ = sched_getaffinity(0, sizeof saved_, &saved_) == 0;
    pinned_ = saved_ok_ && pin_to_one_cpu();
  }
  ~AffinityGuard() {
    if (pinned_) sched_setaffinity(0, sizeof saved_, &saved_);
  }
  AffinityGuard(const AffinityGuard&) = delete;
  AffinityGuard& operator=(const AffinityGuard&) = delete;
  bool pinned() const { return pinned_; }

 private:
  cpu_set_t saved_{};
  bool saved_ok_ = false;
  bool pinned_ = false;
};

// Keeps results observable so the optimizer cannot drop the timed work.
volatile double g_sink = 0.0;

}  // namespace

TimingStats summarize_times(std::vector<double> s) {
  TimingStats out;
  out.reps = s.size();
  if (s.empty()) return out;
  const double n = static_cast<double>(s.size());
  for (double v : s) out.mean += v;
  out.mean /= n;
  for (double v : s) out.stddev += (v - out.mean) * (v - out.mean);
  out.stddev = std::sqrt(out.stddev / n);
  std::sort(s.begin(), s.end());
  const std::size_t mid = s.size() / 2;
  out.median = s.size() % 2 ? s[mid] : 0.5 * (s[mid - 1] + s[mid]);
  return out;
}

double frame_budget(double frame_rate, double response_time) {
  if (!(frame_rate > 0.0)) throw std::invalid_argument("frame rate must be positive");
  return 1.0 / frame_rate - response_time;
}

bool TimingReport::consistent() const { return std::abs(frame_budget(frame_rate, response_time) - t_max) <= 1e-12; }

void TimingConfig::validate() const {
  if (forward_passes < 1000) throw std::invalid_argument("response time needs >= 1000 forward passes");
  if (reps < 10) throw std::invalid_argument("timing needs >= 10 repetitions");
  if (apply_samples == 0) throw std::invalid_argument("apply_samples must be >= 1");
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
}

TimingReport bench_timing(const agent::AgentCheckpoint& agent, const attack::TrainSet& d,
                          const TimingConfig& cfg) {
  cfg.validate();
  if (d.size() == 0) throw std::invalid_argument("timing needs a non-empty train set");
  const AffinityGuard guard(cfg.pin_cpu);
  const num::Network& q = agent.q;
  TimingReport report;
  report.pinned = guard.pinned();
  report.frame_rate = agent.spec.frame_rate;

  std::vector<double> per_forward;
  for (std::size_t rep = 0; rep < cfg.reps; ++rep) {
    const double t = seconds([&] {
      for (std::size_t i = 0; i < cfg.forward_passes; ++i) g_sink = g_sink + static_cast<double>(agent::act_greedy(q, d.states[i % d.size()]));
    });
    per_forward.push_back(t / static_cast<double>(cfg.forward_passes));
  }
  report.response = summarize_times(per_forward);
  report.response_time = report.response.mean;
  report.t_max = frame_budget(report.frame_rate, report.response_time);

  attack::AttackConfig acfg = cfg.attack_cfg;
  acfg.epsilon = cfg.epsilon;
  const num::Shape frame_shape(q.in_shape().begin() + 1, q.in_shape().end());
  const std::size_t slots = q.in_shape().front();
  const std::size_t frame_size = num::element_count(frame_shape);

  std::vector<num::Tensor> frames;
  for (const auto& s : d.states) {
    const auto src = s.data().subspan(0, frame_size);
    frames.emplace_back(frame_shape, std::vector<double>(src.begin(), src.end()));
  }
  // Seconds per observation pushed through an injector; copying the frame
  // into the reused buffer is included, allocation is not.
  const auto time_apply = [&](agent::Injector& hook) {
    std::vector<double> out;
    num::Tensor frame = frames.front();
    for (std::size_t rep = 0; rep < cfg.reps; ++rep) {
      hook.begin_episode(rep);
      const double t = seconds([&] {
        for (std::size_t i = 0; i < cfg.apply_samples; ++i) {
          frame = frames[i % frames.size()];
          hook.inject(frame, i % slots);
          g_sink = g_sink + frame[0];
        }
      });
      out.push_back(t / static_cast<double>(cfg.apply_samples));
    }
    return summarize_times(out);
  };

  for (AttackKind kind : cfg.attacks) {
    AttackTiming at;
    at.attack = kind;
    switch (kind) {
      case AttackKind::Fgsm: {
        // Generation happens for every decision state and is the online cost.
        std::vector<double> gen;
        for (std::size_t rep = 0; rep < cfg.reps; ++rep) {
          gen.push_back(seconds([&] {
            num::Tensor s = d.states[rep % d.size()];
            const attack::Perturbation r = attack::fgsm(q, s, cfg.epsilon);
            for (std::size_t i = 0; i < s.size(); ++i) s[i] = std::clamp(s[i] + r.storage()[i], 0.0, 1.0);
            g_sink = g_sink + s[0];
          }));
        }
        at.online = summarize_times(gen);
        at.apply = at.online;
        at.memory_rewrite = true;
        break;
      }
      case AttackKind::Osfw: {
        std::vector<double> gen;
        for (std::size_t rep = 0; rep < cfg.reps; ++rep) {
          gen.push_back(seconds([&] { g_sink = g_sink + attack::osfw(q, d.states, acfg.k, cfg.epsilon).storage()[0]; }));
        }
        at.online = summarize_times(gen);
        const auto r = attack::osfw(q, d.states, acfg.k, cfg.epsilon);
        auto hook = attack::make_injector(r);
        at.apply = time_apply(*hook);
        break;
      }
      case AttackKind::Random: {
        auto hook = attack::noise_injector_factory(cfg.epsilon, cfg.noise_seed)();
        at.apply = time_apply(*hook);
        at.online = at.apply;
        break;
      }
      case AttackKind::None:
        break;
      default: {
        std::vector<double> gen;
        Generated g;
        for (std::size_t rep = 0; rep < cfg.reps; ++rep) {
          gen.push_back(seconds([&] { g = generate(kind, q, d, acfg, cfg.noise_seed); }));
        }
        at.offline = summarize_times(gen);
        auto hook = attack::make_injector(g.perturbation);
        at.apply = time_apply(*hook);
        at.online = at.apply;
        break;
      }
    }
    at.realtime_feasible = at.online.mean < report.t_max;
    report.attacks.push_back(at);
  }
  return report;
}

void write_timing_report(const std::filesystem::path& dir, const TimingReport& report) {
  std::filesystem::create_directories(dir);
  const auto stats = [](const TimingStats& s) {
    return format_real(s.mean) + '\t' + format_real(s.median) + '\t' + format_real(s.stddev) + '\t' +
           std::to_string(s.reps);
  };
  {
    std::ofstream out(dir / "timing_report.tsv");
    if (!out) throw std::runtime_error("cannot write timing report in " + dir.string());
    out << "# nondeterministic: wall-clock measurements\n"
        << "# frame_rate " << format_real(report.frame_rate) << '\n'
        << "# response_time " << format_real(report.response_time) << '\n'
        << "# response_median " << format_real(report.response.median) << '\n'
        << "# response_std " << format_real(report.response.stddev) << '\n'
        << "# t_max " << format_real(report.t_max) << '\n'
        << "# pinned " << (report.pinned ? 1 : 0) << '\n'
        << "attack\toffline_mean\toffline_median\toffline_std\toffline_reps\tonline_mean\tonline_median\t"
           "online_std\tonline_reps\tapply_mean\tapply_median\tapply_std\tapply_reps\tmemory_rewrite\t"
           "realtime_feasible\n";
    for (const auto& a : report.attacks) {
      out << to_string(a.attack) << '\t' << stats(a.offline) << '\t' << stats(a.online) << '\t' << stats(a.apply)
          << '\t' << (a.memory_rewrite ? 1 : 0) << '\t' << (a.realtime_feasible ? 1 : 0) << '\n';
    }
  }
  std::ofstream out(dir / "timing_summary.txt");
  char buf[200];
  std::snprintf(buf, sizeof buf, "frame rate %.0f Hz, response %.3g s, T_max %.5g s%s\n\n", report.frame_rate,
                report.response_time, report.t_max, report.pinned ? "" : " (not pinned)");
  out << "timings are wall-clock and vary between runs\n" << buf;
  out << "  attack     offline s (std)          online s (std)           feasible\n";
  for (const auto& a : report.attacks) {
    std::snprintf(buf, sizeof buf, "  %-9s  %10.3g (%8.2g)    %10.3g (%8.2g)    %s%s\n", to_string(a.attack).c_str(),
                  a.offline.mean, a.offline.stddev, a.online.mean, a.online.stddev, a.realtime_feasible ? "yes" : "no",
                  a.memory_rewrite ? "  (rewrites memory)" : "");
    out << buf;
  }
}

}  // namespace uaplab::bench

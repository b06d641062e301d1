#include "uaplab/bench/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "uaplab/agentkit/evaluate.hpp"
#include "uaplab/attackforge/perturbation.hpp"

namespace uaplab::bench {
namespace fs = std::filesystem;
namespace {

constexpr const char* kHeader = "# uaplab attack report v1";
constexpr const char* kColumns =
    "row\tepsilon\tmean_return\tstd_return\tlosing_rate\tfooling_rate\tachieved_delta\treached_target\t"
    "alarms\talarm_rate\tlosing_rate_suspended";

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  return out;
}

fs::path row_trace_dir(const fs::path& dir, std::size_t row) {
  return dir / "traces" / ("row_" + std::to_string(row));
}

fs::path row_perturbation(const fs::path& dir, std::size_t row) {
  return dir / "perturbations" / ("row_" + std::to_string(row) + ".uapp");
}

bool close(double a, double b) {
  if (std::isnan(a) || std::isnan(b)) return std::isnan(a) && std::isnan(b);
  return std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(b));
}

std::string fixed(double v, int digits) {
  if (std::isnan(v)) return "n/a";
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace

std::string format_real(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_real(const std::string& s) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  std::size_t used = 0;
  const double v = std::stod(s, &used);
  if (used != s.size()) throw std::invalid_argument("not a number: '" + s + "'");
  return v;
}

void write_attack_report(const fs::path& dir, const AttackReport& report, const fs::path& agent_path,
                         const attack::TrainSet& d) {
  fs::create_directories(dir);
  attack::save_train_set(dir / "train_set.bin", d);
  {
    std::ofstream out = open_out(dir / "attack_report.tsv");
    out << kHeader << '\n'
        << "# env " << report.env << '\n'
        << "# attack " << to_string(report.attack) << '\n'
        << "# agent " << agent_path.string() << '\n'
        << "# episodes " << report.episodes << '\n'
        << "# seed_begin " << report.seed_begin << '\n'
        << "# collect_seed " << report.collect_seed << '\n'
        << "# clean_return " << format_real(report.clean_return) << '\n'
        << "# memory_rewrite " << (report.memory_rewrite ? 1 : 0) << '\n'
        << "# detector " << (report.has_detector ? 1 : 0) << '\n'
        << kColumns << '\n';
    for (std::size_t i = 0; i < report.rows.size(); ++i) {
      const AttackRow& r = report.rows[i];
      out << i << '\t' << format_real(r.epsilon) << '\t' << format_real(r.mean_return) << '\t'
          << format_real(r.std_return) << '\t' << format_real(r.losing_rate) << '\t'
          << format_real(r.fooling_rate) << '\t' << format_real(r.achieved_delta) << '\t'
          << (r.reached_target ? 1 : 0) << '\t' << r.alarms << '\t' << format_real(r.alarm_rate) << '\t'
          << format_real(r.losing_rate_suspended) << '\n';
    }
  }
  {
    std::ofstream out = open_out(dir / "attack_summary.txt");
    out << "attack " << to_string(report.attack) << " on " << report.env << ", " << report.episodes
        << " episodes from seed " << report.seed_begin << "\n"
        << "clean return " << fixed(report.clean_return, 2) << "\n";
    if (report.memory_rewrite) out << "note: this attack rewrites the agent's memory\n";
    out << "\n  epsilon   return (std)       losing  fooling  delta";
    if (report.has_detector) out << "   alarms  losing w/ AD3";
    out << '\n';
    for (const AttackRow& r : report.rows) {
      char line[160];
      std::snprintf(line, sizeof line, "  %-8s  %8s (%6s)  %6s  %7s  %5s", fixed(r.epsilon, 4).c_str(),
                    fixed(r.mean_return, 2).c_str(), fixed(r.std_return, 2).c_str(),
                    fixed(r.losing_rate, 2).c_str(), fixed(r.fooling_rate, 3).c_str(),
                    fixed(r.achieved_delta, 3).c_str());
      out << line;
      if (report.has_detector) {
        std::snprintf(line, sizeof line, "   %6zu  %13s", r.alarms, fixed(r.losing_rate_suspended, 2).c_str());
        out << line;
      }
      if (!r.reached_target) out << "  (target fooling rate not reached)";
      out << '\n';
    }
  }
  for (std::size_t i = 0; i < report.rows.size(); ++i) {
    const AttackRow& r = report.rows[i];
    const fs::path tdir = row_trace_dir(dir, i);
    fs::create_directories(tdir);
    for (const auto& t : r.traces) env::save_trace(tdir / ("seed_" + std::to_string(t.seed) + ".trace"), t);
    if (r.perturbation) {
      fs::create_directories(dir / "perturbations");
      attack::PerturbationInfo info{to_string(report.attack), report.collect_seed,
                                    std::isnan(r.achieved_delta) ? r.fooling_rate : r.achieved_delta};
      attack::save_perturbation(row_perturbation(dir, i), *r.perturbation, info);
    }
  }
}

StoredReport read_attack_report(const fs::path& dir) {
  std::ifstream in(dir / "attack_report.tsv");
  if (!in) throw std::runtime_error("no attack_report.tsv in " + dir.string());
  std::string line;
  if (!std::getline(in, line) || line != kHeader) throw std::runtime_error("not an attack report");
  std::map<std::string, std::string> meta;
  while (std::getline(in, line) && line.rfind("# ", 0) == 0) {
    const auto sp = line.find(' ', 2);
    meta[line.substr(2, sp - 2)] = sp == std::string::npos ? "" : line.substr(sp + 1);
  }
  if (line != kColumns) throw std::runtime_error("attack report: unexpected column line");
  const auto need = [&meta](const std::string& k) {
    const auto it = meta.find(k);
    if (it == meta.end()) throw std::runtime_error("attack report: missing '" + k + "'");
    return it->second;
  };
  StoredReport out;
  AttackReport& rep = out.report;
  rep.env = need("env");
  rep.attack = parse_attack(need("attack"));
  out.agent_path = need("agent");
  rep.episodes = std::stoul(need("episodes"));
  rep.seed_begin = std::stoull(need("seed_begin"));
  rep.collect_seed = std::stoull(need("collect_seed"));
  rep.clean_return = parse_real(need("clean_return"));
  rep.memory_rewrite = need("memory_rewrite") == "1";
  rep.has_detector = need("detector") == "1";
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, '\t');) f.push_back(cell);
    if (f.size() != 11) throw std::runtime_error("attack report: row with " + std::to_string(f.size()) + " fields");
    AttackRow r;
    r.epsilon = parse_real(f[1]);
    r.mean_return = parse_real(f[2]);
    r.std_return = parse_real(f[3]);
    r.losing_rate = parse_real(f[4]);
    r.fooling_rate = parse_real(f[5]);
    r.achieved_delta = parse_real(f[6]);
    r.reached_target = f[7] == "1";
    r.alarms = std::stoul(f[8]);
    r.alarm_rate = parse_real(f[9]);
    r.losing_rate_suspended = parse_real(f[10]);
    rep.rows.push_back(std::move(r));
  }
  return out;
}

CheckResult check_report(const fs::path& dir) {
  CheckResult result;
  const StoredReport stored = read_attack_report(dir);
  const auto& rep = stored.report;
  const agent::AgentCheckpoint agent = agent::load_agent(stored.agent_path);
  const attack::TrainSet d = attack::load_train_set(dir / "train_set.bin");
  const auto problem = [&result](std::size_t row, const std::string& what) {
    result.problems.push_back("row " + std::to_string(row) + ": " + what);
  };
  for (std::size_t i = 0; i < rep.rows.size(); ++i) {
    const AttackRow& r = rep.rows[i];
    std::vector<env::EpisodeTrace> traces;
    for (std::uint64_t s : agent::seed_range(rep.seed_begin, rep.episodes)) {
      const fs::path p = row_trace_dir(dir, i) / ("seed_" + std::to_string(s) + ".trace");
      if (!fs::exists(p)) {
        problem(i, "missing trace " + p.string());
        continue;
      }
      traces.push_back(env::load_trace(p));
    }
    if (traces.size() != rep.episodes) continue;
    const agent::EvaluationResult e = agent::summarize(std::move(traces));
    if (!close(e.mean_return, r.mean_return)) problem(i, "mean return does not match its traces");
    if (!close(e.std_return, r.std_return)) problem(i, "return std does not match its traces");
    if (!close(e.losing_rate, r.losing_rate)) problem(i, "losing rate does not match its traces");

    std::optional<attack::Perturbation> applied;
    if (fs::exists(row_perturbation(dir, i))) applied = attack::load_perturbation(row_perturbation(dir, i)).perturbation;
    const double fr = row_fooling_rate(rep.attack, agent.q, d, r.epsilon, applied ? &*applied : nullptr);
    if (!close(fr, r.fooling_rate)) problem(i, "fooling rate " + format_real(fr) + " != reported " + format_real(r.fooling_rate));
    ++result.rows_checked;
  }
  return result;
}

}  // namespace uaplab::bench

#include "uaplab/envlab/trace.hpp"

#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>

namespace uaplab::env {
namespace {

std::string exact(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

[[noreturn]] void bad_trace(const std::string& what) {
  throw std::runtime_error("malformed trace: " + what);
}

}  // namespace

void EpisodeTrace::record(std::size_t action, double reward) {
  actions.push_back(action);
  rewards.push_back(reward);
  total_return += reward;
}

void EpisodeTrace::validate() const {
  if (actions.size() != rewards.size()) throw std::invalid_argument("trace length mismatch");
  double sum = 0.0;
  for (double r : rewards) sum += r;
  if (sum != total_return) throw std::invalid_argument("trace return does not equal reward sum");
}

void write_trace(std::ostream& out, const EpisodeTrace& trace) {
  out << "# uaplab-trace v1\n";
  out << "# seed " << trace.seed << " terminal " << to_string(trace.terminal) << " return "
      << exact(trace.total_return) << '\n';
  out << "step action reward terminal\n";
  for (std::size_t i = 0; i < trace.actions.size(); ++i) {
    const bool last = i + 1 == trace.actions.size() && trace.terminal != Terminal::None;
    out << i << ' ' << trace.actions[i] << ' ' << exact(trace.rewards[i]) << ' ' << (last ? 1 : 0)
        << '\n';
  }
}

EpisodeTrace read_trace(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "# uaplab-trace v1") bad_trace("missing header");
  EpisodeTrace trace;
  {
    if (!std::getline(in, line)) bad_trace("missing metadata line");
    std::istringstream meta(line);
    std::string hash, k1, k2, k3, terminal;
    double stored_return = 0.0;
    if (!(meta >> hash >> k1 >> trace.seed >> k2 >> terminal >> k3 >> stored_return) ||
        hash != "#" || k1 != "seed" || k2 != "terminal" || k3 != "return") {
      bad_trace("bad metadata line");
    }
    trace.terminal = parse_terminal(terminal);
    trace.total_return = stored_return;
  }
  if (!std::getline(in, line) || line != "step action reward terminal") bad_trace("bad columns");
  double sum = 0.0;
  std::size_t expected = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::size_t step = 0, action = 0;
    double reward = 0.0;
    int flag = 0;
    if (!(row >> step >> action >> reward >> flag) || step != expected) bad_trace("bad row");
    trace.actions.push_back(action);
    trace.rewards.push_back(reward);
    sum += reward;
    ++expected;
  }
  if (sum != trace.total_return) bad_trace("stored return does not equal reward sum");
  return trace;
}

void save_trace(const std::filesystem::path& path, const EpisodeTrace& trace) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write_trace(out, trace);
}

EpisodeTrace load_trace(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return read_trace(in);
}

}  // namespace uaplab::env

#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <ostream>
#include <vector>

#include "uaplab/envlab/environment.hpp"

namespace uaplab::env {

struct EpisodeTrace {
  std::vector<std::size_t> actions;
  std::vector<double> rewards;
  double total_return = 0.0;
  Terminal terminal = Terminal::None;
  std::uint64_t seed = 0;

  void record(std::size_t action, double reward);
  /// Throws unless total_return == sum(rewards) and the lengths agree.
  void validate() const;

  friend bool operator==(const EpisodeTrace&, const EpisodeTrace&) = default;
};

// Plain-text trace format:
//   # uaplab-trace v1
//   # seed <u64> terminal <none|win|lose|horizon> return <%.17g>
//   step action reward terminal
//   <step> <action> <reward %.17g> <0|1>      one line per decision
// The terminal column is 1 only on the final line of a finished episode.
void write_trace(std::ostream& out, const EpisodeTrace& trace);
EpisodeTrace read_trace(std::istream& in);

void save_trace(const std::filesystem::path& path, const EpisodeTrace& trace);
EpisodeTrace load_trace(const std::filesystem::path& path);

}  // namespace uaplab::env

#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <ostream>

#include "uaplab/envlab/env_spec.hpp"
#include "uaplab/numcore/network.hpp"

namespace uaplab::agent {

/// A trained victim: its Q-network plus provenance and the clean greedy
/// return measured on eval seeds [eval_seed_begin, eval_seed_begin + eval_episodes).
struct AgentCheckpoint {
  num::Network q;
  env::EnvSpec spec;
  std::uint64_t training_seed = 0;
  double clean_return = 0.0;
  std::uint64_t eval_seed_begin = 0;
  std::size_t eval_episodes = 0;

  friend bool operator==(const AgentCheckpoint&, const AgentCheckpoint&) = default;
};

// Agent file layout (little-endian):
//   "UAPLAGT1", u32 version,
//   str env name, u64 frame_skip, u64 horizon,
//   u64 training seed, f64 clean return, u64 eval seed begin, u64 eval episodes,
//   then a complete network checkpoint (see numcore/checkpoint.hpp).
inline constexpr std::uint32_t kAgentFormatVersion = 1;

void write_agent(std::ostream& out, const AgentCheckpoint& agent);
AgentCheckpoint read_agent(std::istream& in);
void save_agent(const std::filesystem::path& path, const AgentCheckpoint& agent);
AgentCheckpoint load_agent(const std::filesystem::path& path);

}  // namespace uaplab::agent

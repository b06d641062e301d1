#include "uaplab/agentkit/agent_checkpoint.hpp"

#include <fstream>

#include "uaplab/numcore/binary_io.hpp"
#include "uaplab/numcore/checkpoint.hpp"

namespace uaplab::agent {
namespace {
constexpr std::string_view kMagic = "UAPLAGT1";
}

void write_agent(std::ostream& out, const AgentCheckpoint& agent) {
  num::BinaryWriter w(out);
  w.magic(kMagic);
  w.u32(kAgentFormatVersion);
  w.str(agent.spec.name());
  w.u64(agent.spec.frame_skip);
  w.u64(agent.spec.horizon);
  w.u64(agent.training_seed);
  w.f64(agent.clean_return);
  w.u64(agent.eval_seed_begin);
  w.u64(agent.eval_episodes);
  num::write_network(out, agent.q);
}

AgentCheckpoint read_agent(std::istream& in) {
  num::BinaryReader r(in);
  r.expect_magic(kMagic);
  if (const auto v = r.u32(); v != kAgentFormatVersion) {
    throw num::FormatError("unsupported agent format version " + std::to_string(v));
  }
  AgentCheckpoint agent;
  agent.spec = env::spec_by_name(r.str());
  agent.spec.frame_skip = r.u64();
  agent.spec.horizon = r.u64();
  agent.spec.validate();
  agent.training_seed = r.u64();
  agent.clean_return = r.f64();
  agent.eval_seed_begin = r.u64();
  agent.eval_episodes = r.u64();
  agent.q = num::read_network(in);
  if (agent.q.in_shape() != agent.spec.state_shape() ||
      agent.q.out_dim() != agent.spec.num_actions()) {
    throw num::FormatError("agent network does not match its environment");
  }
  return agent;
}

void save_agent(const std::filesystem::path& path, const AgentCheckpoint& agent) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write_agent(out, agent);
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

AgentCheckpoint load_agent(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return read_agent(in);
}

}  // namespace uaplab::agent

#include "uaplab/attackforge/train_set.hpp"

#include <fstream>
#include <numeric>
#include <stdexcept>

#include "uaplab/agentkit/policy.hpp"
#include "uaplab/envlab/environment.hpp"
#include "uaplab/numcore/binary_io.hpp"
#include "uaplab/numcore/loss.hpp"

namespace uaplab::attack {
namespace {
constexpr std::string_view kMagic = "UAPLTRS1";
constexpr std::uint32_t kVersion = 1;
}  // namespace

std::vector<num::Tensor> TrainSet::sanitized() const {
  std::vector<num::Tensor> out;
  for (std::size_t i = 0; i < states.size(); ++i) {
    if (critical[i]) out.push_back(states[i]);
  }
  return out;
}

void TrainSet::validate() const {
  const std::size_t n = states.size();
  if (actions.size() != n || scores.size() != n || critical.size() != n) {
    throw std::invalid_argument("train set arrays have different lengths");
  }
  const Sanitization expect = sanitize_scores(scores);
  if (expect.critical != critical || expect.beta != beta) {
    throw std::invalid_argument("train set mask or beta inconsistent with scores");
  }
}

double criticality_score(const num::Network& q, const num::Tensor& s) {
  const num::Tensor p = num::softmax(q.forward(s));
  const double n = static_cast<double>(p.size());
  const double mean = p.sum() / n;
  double var = 0.0;
  for (double v : p.data()) var += (v - mean) * (v - mean);
  return var / n;
}

Sanitization sanitize_scores(std::span<const double> scores) {
  Sanitization out;
  if (scores.empty()) return out;
  out.beta = std::accumulate(scores.begin(), scores.end(), 0.0) / static_cast<double>(scores.size());
  out.critical.reserve(scores.size());
  for (double v : scores) out.critical.push_back(v >= out.beta);
  return out;
}

TrainSet build_train_set(const num::Network& q, std::vector<num::Tensor> states) {
  TrainSet d;
  d.states = std::move(states);
  for (const auto& s : d.states) {
    const num::Tensor out = q.forward(s);
    d.actions.push_back(agent::argmax(out.data()));
    d.scores.push_back(criticality_score(q, s));
  }
  Sanitization san = sanitize_scores(d.scores);
  d.beta = san.beta;
  d.critical = std::move(san.critical);
  return d;
}

TrainSet collect_train_set(const num::Network& q, const env::EnvSpec& spec, std::uint64_t seed) {
  env::Environment environment(spec);
  num::Tensor s = environment.reset(seed);
  std::vector<num::Tensor> states;
  while (!environment.done()) {
    states.push_back(s);
    s = environment.step(agent::act_greedy(q, s)).state;
  }
  return build_train_set(q, std::move(states));
}

void write_train_set(std::ostream& out, const TrainSet& d) {
  d.validate();
  num::BinaryWriter w(out);
  w.magic(kMagic);
  w.u32(kVersion);
  w.u64(d.size());
  w.f64(d.beta);
  for (std::size_t i = 0; i < d.size(); ++i) {
    w.u64(d.actions[i]);
    w.f64(d.scores[i]);
    w.u8(d.critical[i] ? 1 : 0);
    w.tensor(d.states[i]);
  }
}

TrainSet read_train_set(std::istream& in) {
  num::BinaryReader rd(in);
  rd.expect_magic(kMagic);
  if (const auto v = rd.u32(); v != kVersion) {
    throw num::FormatError("unsupported train set version " + std::to_string(v));
  }
  TrainSet d;
  const std::uint64_t n = rd.u64();
  d.beta = rd.f64();
  for (std::uint64_t i = 0; i < n; ++i) {
    d.actions.push_back(rd.u64());
    d.scores.push_back(rd.f64());
    d.critical.push_back(rd.u8() != 0);
    d.states.push_back(rd.tensor());
  }
  try {
    d.validate();
  } catch (const std::invalid_argument& e) {
    throw num::FormatError(std::string("corrupt train set: ") + e.what());
  }
  return d;
}

void save_train_set(const std::filesystem::path& path, const TrainSet& d) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write_train_set(out, d);
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

TrainSet load_train_set(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return read_train_set(in);
}

}  // namespace uaplab::attack

#include "uaplab/attackforge/perturbation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "uaplab/numcore/binary_io.hpp"

namespace uaplab::attack {
namespace {

constexpr std::string_view kMagic = "UAPLPRT1";

std::atomic<std::uint64_t> g_checks{0};
std::atomic<std::uint64_t> g_violations{0};

num::Shape frame_shape_of(const num::Shape& state_shape) {
  return num::Shape(state_shape.begin() + 1, state_shape.end());
}

num::Shape storage_shape(PerturbationMode mode, const num::Shape& state_shape) {
  if (mode != PerturbationMode::SlotTied) return state_shape;
  num::Shape frame = frame_shape_of(state_shape);
  if (frame.empty()) frame = {1};
  return frame;
}

}  // namespace

std::string to_string(PerturbationMode mode) {
  switch (mode) {
    case PerturbationMode::PerSlot:
      return "per_slot";
    case PerturbationMode::SlotTied:
      return "slot_tied";
    case PerturbationMode::PerState:
      return "per_state";
  }
  return "per_slot";
}

PerturbationMode parse_mode(const std::string& name) {
  if (name == "per_slot") return PerturbationMode::PerSlot;
  if (name == "slot_tied") return PerturbationMode::SlotTied;
  if (name == "per_state") return PerturbationMode::PerState;
  throw std::invalid_argument("unknown perturbation mode '" + name + "'");
}

Perturbation::Perturbation(PerturbationMode mode, num::Shape state_shape, double epsilon)
    : Perturbation(mode, state_shape, epsilon, num::Tensor(storage_shape(mode, state_shape))) {}

Perturbation::Perturbation(PerturbationMode mode, num::Shape state_shape, double epsilon,
                           num::Tensor storage)
    : mode_(mode), state_shape_(std::move(state_shape)), epsilon_(epsilon), storage_(std::move(storage)) {
  if (state_shape_.empty() || num::element_count(state_shape_) == 0) {
    throw num::ShapeError("perturbation needs a non-empty state shape");
  }
  if (!(epsilon_ > 0.0) || !std::isfinite(epsilon_)) {
    throw std::invalid_argument("perturbation bound epsilon must be positive");
  }
  if (storage_.shape() != storage_shape(mode_, state_shape_)) {
    throw num::ShapeError("perturbation storage: expected shape " +
                          num::to_string(storage_shape(mode_, state_shape_)) + ", got " +
                          num::to_string(storage_.shape()));
  }
  num::require_finite(storage_, "perturbation");
}

std::size_t Perturbation::frame_size() const {
  return num::element_count(state_shape_) / state_shape_.front();
}

std::span<const double> Perturbation::slot(std::size_t j) const {
  if (j >= slots()) throw std::out_of_range("perturbation slot out of range");
  if (mode_ == PerturbationMode::SlotTied) return storage_.data();
  return storage_.data().subspan(j * frame_size(), frame_size());
}

num::Tensor Perturbation::as_state() const {
  if (mode_ != PerturbationMode::SlotTied) return storage_;
  num::Tensor full(state_shape_);
  const std::size_t fs = frame_size();
  for (std::size_t j = 0; j < slots(); ++j) {
    std::copy(storage_.data().begin(), storage_.data().end(), full.data().begin() + j * fs);
  }
  return full;
}

bool Perturbation::slots_identical() const {
  if (mode_ == PerturbationMode::SlotTied) return true;
  const auto first = slot(0);
  for (std::size_t j = 1; j < slots(); ++j) {
    const auto other = slot(j);
    if (!std::equal(first.begin(), first.end(), other.begin())) return false;
  }
  return true;
}

void Perturbation::check_bound() const {
  if (!storage_.all_finite() || storage_.max_abs() > epsilon_) {
    throw std::logic_error("perturbation exceeds its l-infinity bound " + std::to_string(epsilon_));
  }
}

void write_perturbation(std::ostream& out, const Perturbation& r, const PerturbationInfo& info) {
  num::BinaryWriter w(out);
  w.magic(kMagic);
  w.u32(kPerturbationFormatVersion);
  w.u8(static_cast<std::uint8_t>(r.mode()));
  w.u32(static_cast<std::uint32_t>(r.state_shape().size()));
  for (std::size_t d : r.state_shape()) w.u64(d);
  w.f64(r.epsilon());
  w.str(info.generator);
  w.u64(info.seed);
  w.f64(info.achieved_fooling_rate);
  const std::size_t frames = r.mode() == PerturbationMode::SlotTied ? 1 : r.slots();
  w.u64(frames);
  for (double v : r.storage().data()) w.f64(v);
}

PerturbationFile read_perturbation(std::istream& in) {
  num::BinaryReader rd(in);
  rd.expect_magic(kMagic);
  if (const auto v = rd.u32(); v != kPerturbationFormatVersion) {
    throw num::FormatError("unsupported perturbation format version " + std::to_string(v));
  }
  const std::uint8_t mode_tag = rd.u8();
  if (mode_tag > 2) throw num::FormatError("unknown perturbation mode tag");
  const auto mode = static_cast<PerturbationMode>(mode_tag);
  const std::uint32_t rank = rd.u32();
  if (rank == 0 || rank > 8) throw num::FormatError("bad perturbation rank");
  num::Shape shape(rank);
  for (auto& d : shape) d = rd.u64();
  const double epsilon = rd.f64();
  PerturbationInfo info;
  info.generator = rd.str();
  info.seed = rd.u64();
  info.achieved_fooling_rate = rd.f64();
  const std::uint64_t frames = rd.u64();
  const std::uint64_t expected = mode == PerturbationMode::SlotTied ? 1 : shape.front();
  if (frames != expected) throw num::FormatError("perturbation frame count does not match mode");
  const num::Shape sshape = storage_shape(mode, shape);
  std::vector<double> values(num::element_count(sshape));
  for (double& v : values) v = rd.f64();
  return {Perturbation(mode, shape, epsilon, num::Tensor(sshape, std::move(values))), info};
}

void save_perturbation(const std::filesystem::path& path, const Perturbation& r,
                       const PerturbationInfo& info) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write_perturbation(out, r, info);
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

PerturbationFile load_perturbation(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return read_perturbation(in);
}

num::Tensor perturb_state(const num::Tensor& s, const num::Tensor& r_state) {
  num::require_same_shape(s, r_state, "perturb_state");
  num::Tensor out(s.shape());
  for (std::size_t i = 0; i < s.size(); ++i) out[i] = std::clamp(s[i] + r_state[i], 0.0, 1.0);
  return out;
}

void accumulate_and_clamp(num::Tensor& r, const num::Tensor& delta, double epsilon) {
  num::require_same_shape(r, delta, "accumulate_and_clamp");
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = std::clamp(r[i] + delta[i], -epsilon, epsilon);
  g_checks.fetch_add(1, std::memory_order_relaxed);
  if (!r.all_finite() || r.max_abs() > epsilon) {
    g_violations.fetch_add(1, std::memory_order_relaxed);
    throw std::logic_error("accumulate_and_clamp left the l-infinity ball");
  }
}

void accumulate_and_clamp(Perturbation& r, const num::Tensor& delta) {
  accumulate_and_clamp(r.storage(), delta, r.epsilon());
}

ClampAudit clamp_audit() { return {g_checks.load(), g_violations.load()}; }

void reset_clamp_audit() {
  g_checks = 0;
  g_violations = 0;
}

}  // namespace uaplab::attack

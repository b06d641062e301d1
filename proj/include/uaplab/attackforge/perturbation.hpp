#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <ostream>
#include <span>
#include <string>

#include "uaplab/numcore/tensor.hpp"

namespace uaplab::attack {

/// per_slot: one frame per observation slot (UAP-S, OSFW, OSFW(U)).
/// slot_tied: one frame shared by every slot (UAP-O).
/// per_state: a full-state perturbation that must be written into the
///   agent's memory (FGSM).
enum class PerturbationMode : std::uint8_t { PerSlot = 0, SlotTied = 1, PerState = 2 };

std::string to_string(PerturbationMode mode);
PerturbationMode parse_mode(const std::string& name);

/// An l-infinity bounded additive perturbation for states of a fixed shape.
/// The first state dimension indexes observation slots.
class Perturbation {
 public:
  Perturbation() = default;
  /// All-zero perturbation.
  Perturbation(PerturbationMode mode, num::Shape state_shape, double epsilon);
  /// Wraps stored values: the full state shape, or one frame when slot-tied.
  Perturbation(PerturbationMode mode, num::Shape state_shape, double epsilon, num::Tensor storage);

  PerturbationMode mode() const { return mode_; }
  const num::Shape& state_shape() const { return state_shape_; }
  std::size_t slots() const { return state_shape_.front(); }
  std::size_t frame_size() const;
  double epsilon() const { return epsilon_; }

  /// Raw values: state-shaped, or frame-shaped when slot-tied.
  const num::Tensor& storage() const { return storage_; }
  num::Tensor& storage() { return storage_; }

  /// View of the values added to slot j.
  std::span<const double> slot(std::size_t j) const;
  /// The perturbation as a full state-shaped tensor.
  num::Tensor as_state() const;

  double max_abs() const { return storage_.max_abs(); }
  bool slots_identical() const;
  /// Throws std::logic_error unless every value is finite with |v| <= epsilon.
  void check_bound() const;

  friend bool operator==(const Perturbation&, const Perturbation&) = default;

 private:
  PerturbationMode mode_ = PerturbationMode::PerSlot;
  num::Shape state_shape_;
  double epsilon_ = 0.0;
  num::Tensor storage_;
};

struct PerturbationInfo {
  std::string generator;
  std::uint64_t seed = 0;
  double achieved_fooling_rate = 0.0;

  friend bool operator==(const PerturbationInfo&, const PerturbationInfo&) = default;
};

struct PerturbationFile {
  Perturbation perturbation;
  PerturbationInfo info;
};

// Perturbation file layout (little-endian):
//   "UAPLPRT1", u32 version, u8 mode,
//   u32 rank, u64 dims[rank]        state shape; for pixel states (N, H', W')
//   f64 epsilon, str generator, u64 seed, f64 achieved fooling rate,
//   u64 stored frame count, then that many frames of f64 values.
// Slot-tied perturbations store one frame; the others store N.
inline constexpr std::uint32_t kPerturbationFormatVersion = 1;

void write_perturbation(std::ostream& out, const Perturbation& r, const PerturbationInfo& info);
PerturbationFile read_perturbation(std::istream& in);
void save_perturbation(const std::filesystem::path& path, const Perturbation& r,
                       const PerturbationInfo& info);
PerturbationFile load_perturbation(const std::filesystem::path& path);

/// clip(s + r, 0, 1): perturbed pixel states stay valid inputs.
num::Tensor perturb_state(const num::Tensor& s, const num::Tensor& r_state);

/// r <- clamp(r + delta, -epsilon, epsilon), then audits the l-infinity bound.
void accumulate_and_clamp(num::Tensor& r, const num::Tensor& delta, double epsilon);
void accumulate_and_clamp(Perturbation& r, const num::Tensor& delta);

/// Process-wide tally of bound checks made by accumulate_and_clamp.
struct ClampAudit {
  std::uint64_t checks = 0;
  std::uint64_t violations = 0;
};
ClampAudit clamp_audit();
void reset_clamp_audit();

}  // namespace uaplab::attack

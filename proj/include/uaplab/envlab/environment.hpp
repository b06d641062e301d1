#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "uaplab/envlab/env_spec.hpp"
#include "uaplab/envlab/games.hpp"
#include "uaplab/numcore/tensor.hpp"

namespace uaplab::env {

enum class Terminal { None, Win, Lose, Horizon };

std::string to_string(Terminal t);
Terminal parse_terminal(const std::string& s);

/// Gray-scale raw frame -> (height, width) in [0, 1] by block averaging and
/// dividing by 255.
num::Tensor preprocess(const RawObservation& obs, const EnvSpec& spec);

/// Throws std::invalid_argument unless s is (N, H', W') with values in [0, 1].
void validate_state(const num::Tensor& s, const EnvSpec& spec);

/// Agent-side memory of the most recent N preprocessed frames, newest last.
class FrameStack {
 public:
  FrameStack(std::size_t slots, std::size_t height, std::size_t width);
  /// Replaces every slot with the same frame (episode start).
  void fill(const num::Tensor& frame);
  /// Drops the oldest frame and appends this one.
  void push(const num::Tensor& frame);
  const num::Tensor& state() const { return state_; }

 private:
  std::size_t frame_size_;
  num::Tensor state_;
};

struct StepResult {
  /// The frame_skip raw frames of this decision window, in arrival order.
  std::vector<RawObservation> observations;
  num::Tensor state;
  double reward = 0.0;
  bool done = false;
  Terminal terminal = Terminal::None;
};

/// Decision-level environment: applies frame skip, preprocessing and frame
/// stacking on top of a Game.
class Environment {
 public:
  explicit Environment(EnvSpec spec);
  Environment(const Environment& other);
  Environment& operator=(const Environment& other);
  Environment(Environment&&) noexcept = default;
  Environment& operator=(Environment&&) noexcept = default;

  const EnvSpec& spec() const { return spec_; }

  /// Starts an episode. The initial state repeats the first frame N times.
  num::Tensor reset(std::uint64_t seed);
  const RawObservation& initial_observation() const { return initial_; }

  /// Repeats the action for N raw frames; reward is the window sum.
  StepResult step(std::size_t action);

  bool done() const { return done_; }
  std::size_t decision_step() const { return step_; }
  double score() const { return score_; }
  const num::Tensor& state() const { return stack_.state(); }
  const Game& game() const { return *game_; }

 private:
  EnvSpec spec_;
  std::unique_ptr<Game> game_;
  FrameStack stack_;
  RawObservation initial_;
  std::size_t step_ = 0;
  double score_ = 0.0;
  bool done_ = true;
};

}  // namespace uaplab::env

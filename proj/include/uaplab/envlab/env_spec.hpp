#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "uaplab/numcore/tensor.hpp"

namespace uaplab::env {

enum class GameKind { Catch, Corridor };

std::string to_string(GameKind kind);
GameKind parse_game(const std::string& name);

/// Static description of a toy environment.
///
/// Games are simulated on a logical grid of cells and rendered at
/// raw_height x raw_width pixels in [0, 255]. Preprocessing block-averages
/// that raster down to height x width and maps it to [0, 1]. Each decision
/// repeats the chosen action for frame_skip raw frames; the agent state
/// stacks exactly those frames, oldest first.
struct EnvSpec {
  GameKind game = GameKind::Catch;
  std::size_t grid_height = 16;
  std::size_t grid_width = 16;
  std::size_t raw_height = 32;
  std::size_t raw_width = 32;
  std::size_t height = 16;
  std::size_t width = 16;
  std::size_t frame_skip = 4;
  std::vector<std::string> actions;
  double frame_rate = 60.0;
  std::size_t horizon = 320;  ///< decision steps per episode
  bool win_lose_terminal = false;

  void validate() const;
  std::size_t num_actions() const { return actions.size(); }
  num::Shape state_shape() const { return {frame_skip, height, width}; }
  num::Shape frame_shape() const { return {height, width}; }
  std::string name() const { return to_string(game); }

  friend bool operator==(const EnvSpec&, const EnvSpec&) = default;
};

/// Paddle-and-ball game; per-ball reward +1 caught / -1 missed. The episode
/// is lost when the cumulative score is negative at the horizon.
EnvSpec catch_spec();

/// Lane-crossing game; +1 per crossing, never negative, no lose condition.
EnvSpec corridor_spec();

EnvSpec spec_by_name(const std::string& name);

}  // namespace uaplab::env

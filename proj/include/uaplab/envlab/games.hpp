#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "uaplab/envlab/env_spec.hpp"
#include "uaplab/numcore/random.hpp"

namespace uaplab::env {

/// Raw frame in [0, 255], as the game would emit it.
struct RawObservation {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<double> pixels;
  std::size_t step_index = 0;  ///< raw frame counter since reset

  void validate() const;
};

/// Frame-level simulator. One call to advance() is one raw frame.
class Game {
 public:
  virtual ~Game() = default;
  virtual void reset(std::uint64_t seed) = 0;
  /// Advances one raw frame with the given action; returns the frame reward.
  virtual double advance(std::size_t action) = 0;
  virtual RawObservation render() const = 0;
  virtual std::unique_ptr<Game> clone() const = 0;
  std::size_t frame() const { return frame_; }

 protected:
  std::size_t frame_ = 0;
};

/// Ball falls one row every second frame; paddle moves one cell every second
/// frame. On contact the ball is scored and respawns at the top in a column
/// drawn from the episode's seeded stream.
class CatchGame final : public Game {
 public:
  static constexpr std::size_t kPaddleHalfWidth = 1;
  enum Action : std::size_t { kLeft = 0, kStay = 1, kRight = 2 };

  explicit CatchGame(EnvSpec spec);
  void reset(std::uint64_t seed) override;
  double advance(std::size_t action) override;
  RawObservation render() const override;
  std::unique_ptr<Game> clone() const override { return std::make_unique<CatchGame>(*this); }

  std::size_t ball_row() const { return ball_row_; }
  std::size_t ball_col() const { return ball_col_; }
  std::size_t paddle_center() const { return paddle_; }
  std::size_t drops() const { return caught_ + missed_; }
  std::size_t caught() const { return caught_; }

 private:
  void spawn_ball();

  EnvSpec spec_;
  num::Rng rng_;
  std::size_t ball_row_ = 0;
  std::size_t ball_col_ = 0;
  std::size_t paddle_ = 0;
  std::size_t caught_ = 0;
  std::size_t missed_ = 0;
};

/// Agent crosses horizontal lanes of moving cars from the bottom row to the
/// top. A collision pushes it back two rows. Lane speeds and directions come
/// from the seed; there is no other randomness.
class CorridorGame final : public Game {
 public:
  enum Action : std::size_t { kUp = 0, kStay = 1, kDown = 2 };
  static constexpr std::size_t kCarWidth = 2;

  explicit CorridorGame(EnvSpec spec);
  void reset(std::uint64_t seed) override;
  double advance(std::size_t action) override;
  RawObservation render() const override;
  std::unique_ptr<Game> clone() const override { return std::make_unique<CorridorGame>(*this); }

  std::size_t agent_row() const { return agent_row_; }
  std::size_t agent_col() const { return spec_.grid_width / 2; }
  std::size_t crossings() const { return crossings_; }

 private:
  struct Lane {
    std::size_t row;
    std::size_t position;
    std::size_t period;
    bool rightward;
  };
  bool collides() const;

  EnvSpec spec_;
  std::vector<Lane> lanes_;
  std::size_t agent_row_ = 0;
  std::size_t crossings_ = 0;
};

std::unique_ptr<Game> make_game(const EnvSpec& spec);

}  // namespace uaplab::env

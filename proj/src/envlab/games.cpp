#include "uaplab/envlab/games.hpp"

#include <algorithm>
#include <stdexcept>

namespace uaplab::env {
namespace {

constexpr double kBright = 255.0;
constexpr double kAgentShade = 170.0;

class Canvas {
 public:
  explicit Canvas(const EnvSpec& spec)
      : grid_w_(spec.grid_width),
        scale_y_(spec.raw_height / spec.grid_height),
        scale_x_(spec.raw_width / spec.grid_width) {
    obs_.height = spec.raw_height;
    obs_.width = spec.raw_width;
    obs_.pixels.assign(spec.raw_height * spec.raw_width, 0.0);
  }

  void cell(std::size_t row, std::size_t col, double value) {
    for (std::size_t y = 0; y < scale_y_; ++y) {
      for (std::size_t x = 0; x < scale_x_; ++x) {
        obs_.pixels[(row * scale_y_ + y) * obs_.width + col * scale_x_ + x] = value;
      }
    }
  }

  RawObservation finish(std::size_t frame) {
    obs_.step_index = frame;
    return std::move(obs_);
  }

  std::size_t grid_width() const { return grid_w_; }

 private:
  std::size_t grid_w_;
  std::size_t scale_y_;
  std::size_t scale_x_;
  RawObservation obs_;
};

}  // namespace

void RawObservation::validate() const {
  if (pixels.size() != height * width || pixels.empty()) {
    throw std::invalid_argument("raw observation size does not match its dimensions");
  }
  for (double p : pixels) {
    if (!(p >= 0.0 && p <= 255.0)) throw std::invalid_argument("raw pixel outside [0, 255]");
  }
}

CatchGame::CatchGame(EnvSpec spec) : spec_(std::move(spec)) { spec_.validate(); }

void CatchGame::reset(std::uint64_t seed) {
  rng_.seed(seed);
  frame_ = 0;
  caught_ = 0;
  missed_ = 0;
  paddle_ = kPaddleHalfWidth + num::uniform_index(rng_, spec_.grid_width - 2 * kPaddleHalfWidth);
  spawn_ball();
}

void CatchGame::spawn_ball() {
  ball_row_ = 0;
  ball_col_ = num::uniform_index(rng_, spec_.grid_width);
}

double CatchGame::advance(std::size_t action) {
  if (action >= spec_.num_actions()) throw std::out_of_range("catch action out of range");
  double reward = 0.0;
  if (frame_ % 2 == 0) {
    if (action == kLeft && paddle_ > kPaddleHalfWidth) --paddle_;
    if (action == kRight && paddle_ + kPaddleHalfWidth + 1 < spec_.grid_width) ++paddle_;
  } else {
    ++ball_row_;
    if (ball_row_ == spec_.grid_height - 1) {
      const std::size_t gap = ball_col_ > paddle_ ? ball_col_ - paddle_ : paddle_ - ball_col_;
      if (gap <= kPaddleHalfWidth) {
        reward = 1.0;
        ++caught_;
      } else {
        reward = -1.0;
        ++missed_;
      }
      spawn_ball();
    }
  }
  ++frame_;
  return reward;
}

RawObservation CatchGame::render() const {
  Canvas canvas(spec_);
  for (std::size_t c = paddle_ - kPaddleHalfWidth; c <= paddle_ + kPaddleHalfWidth; ++c) {
    canvas.cell(spec_.grid_height - 1, c, kBright);
  }
  canvas.cell(ball_row_, ball_col_, kBright);
  return canvas.finish(frame_);
}

CorridorGame::CorridorGame(EnvSpec spec) : spec_(std::move(spec)) { spec_.validate(); }

void CorridorGame::reset(std::uint64_t seed) {
  num::Rng rng(seed);
  frame_ = 0;
  crossings_ = 0;
  agent_row_ = spec_.grid_height - 1;
  lanes_.clear();
  for (std::size_t row = 2; row + 1 < spec_.grid_height; row += 2) {
    Lane lane{row, num::uniform_index(rng, spec_.grid_width), 2 + num::uniform_index(rng, 4),
              num::uniform01(rng) < 0.5};
    lanes_.push_back(lane);
  }
}

bool CorridorGame::collides() const {
  const std::size_t col = agent_col();
  for (const Lane& lane : lanes_) {
    if (lane.row != agent_row_) continue;
    for (std::size_t i = 0; i < kCarWidth; ++i) {
      if ((lane.position + i) % spec_.grid_width == col) return true;
    }
  }
  return false;
}

double CorridorGame::advance(std::size_t action) {
  if (action >= spec_.num_actions()) throw std::out_of_range("corridor action out of range");
  double reward = 0.0;
  const std::size_t bottom = spec_.grid_height - 1;
  if (frame_ % 2 == 0) {
    if (action == kUp && agent_row_ > 0) --agent_row_;
    if (action == kDown && agent_row_ < bottom) ++agent_row_;
  }
  for (Lane& lane : lanes_) {
    if (frame_ % lane.period != 0) continue;
    lane.position = lane.rightward ? (lane.position + 1) % spec_.grid_width
                                   : (lane.position + spec_.grid_width - 1) % spec_.grid_width;
  }
  if (agent_row_ == 0) {
    reward = 1.0;
    ++crossings_;
    agent_row_ = bottom;
  } else if (collides()) {
    agent_row_ = std::min(bottom, agent_row_ + 2);
  }
  ++frame_;
  return reward;
}

RawObservation CorridorGame::render() const {
  Canvas canvas(spec_);
  for (const Lane& lane : lanes_) {
    for (std::size_t i = 0; i < kCarWidth; ++i) {
      canvas.cell(lane.row, (lane.position + i) % spec_.grid_width, kBright);
    }
  }
  canvas.cell(agent_row_, agent_col(), kAgentShade);
  return canvas.finish(frame_);
}

std::unique_ptr<Game> make_game(const EnvSpec& spec) {
  switch (spec.game) {
    case GameKind::Catch:
      return std::make_unique<CatchGame>(spec);
    case GameKind::Corridor:
      return std::make_unique<CorridorGame>(spec);
  }
  throw std::invalid_argument("unknown game");
}

}  // namespace uaplab::env

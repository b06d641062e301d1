#include "uaplab/envlab/environment.hpp"

#include <algorithm>
#include <stdexcept>

namespace uaplab::env {

std::string to_string(Terminal t) {
  switch (t) {
    case Terminal::None:
      return "none";
    case Terminal::Win:
      return "win";
    case Terminal::Lose:
      return "lose";
    case Terminal::Horizon:
      return "horizon";
  }
  return "none";
}

Terminal parse_terminal(const std::string& s) {
  if (s == "none") return Terminal::None;
  if (s == "win") return Terminal::Win;
  if (s == "lose") return Terminal::Lose;
  if (s == "horizon") return Terminal::Horizon;
  throw std::invalid_argument("unknown terminal '" + s + "'");
}

num::Tensor preprocess(const RawObservation& obs, const EnvSpec& spec) {
  if (obs.height != spec.raw_height || obs.width != spec.raw_width) {
    throw num::ShapeError("raw observation is " + std::to_string(obs.height) + "x" +
                          std::to_string(obs.width) + ", environment expects " +
                          std::to_string(spec.raw_height) + "x" + std::to_string(spec.raw_width));
  }
  obs.validate();
  const std::size_t by = obs.height / spec.height;
  const std::size_t bx = obs.width / spec.width;
  const double norm = 1.0 / (255.0 * static_cast<double>(by * bx));
  num::Tensor frame(spec.frame_shape());
  for (std::size_t y = 0; y < spec.height; ++y) {
    for (std::size_t x = 0; x < spec.width; ++x) {
      double acc = 0.0;
      for (std::size_t dy = 0; dy < by; ++dy) {
        for (std::size_t dx = 0; dx < bx; ++dx) {
          acc += obs.pixels[(y * by + dy) * obs.width + x * bx + dx];
        }
      }
      frame[y * spec.width + x] = std::clamp(acc * norm, 0.0, 1.0);
    }
  }
  return frame;
}

void validate_state(const num::Tensor& s, const EnvSpec& spec) {
  if (s.shape() != spec.state_shape()) {
    throw std::invalid_argument("state shape " + num::to_string(s.shape()) + ", expected " +
                                num::to_string(spec.state_shape()));
  }
  for (double v : s.data()) {
    if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("state value outside [0, 1]");
  }
}

FrameStack::FrameStack(std::size_t slots, std::size_t height, std::size_t width)
    : frame_size_(height * width), state_({slots, height, width}) {}

void FrameStack::fill(const num::Tensor& frame) {
  if (frame.size() != frame_size_) throw num::ShapeError("frame size does not match stack");
  auto dst = state_.data();
  for (std::size_t slot = 0; slot < state_.shape()[0]; ++slot) {
    std::copy(frame.data().begin(), frame.data().end(), dst.begin() + slot * frame_size_);
  }
}

void FrameStack::push(const num::Tensor& frame) {
  if (frame.size() != frame_size_) throw num::ShapeError("frame size does not match stack");
  auto dst = state_.data();
  std::copy(dst.begin() + frame_size_, dst.end(), dst.begin());
  std::copy(frame.data().begin(), frame.data().end(), dst.end() - frame_size_);
}

Environment::Environment(EnvSpec spec)
    : spec_((spec.validate(), std::move(spec))),
      game_(make_game(spec_)),
      stack_(spec_.frame_skip, spec_.height, spec_.width) {}

Environment::Environment(const Environment& other)
    : spec_(other.spec_),
      game_(other.game_->clone()),
      stack_(other.stack_),
      initial_(other.initial_),
      step_(other.step_),
      score_(other.score_),
      done_(other.done_) {}

Environment& Environment::operator=(const Environment& other) {
  if (this != &other) *this = Environment(other);
  return *this;
}

num::Tensor Environment::reset(std::uint64_t seed) {
  game_->reset(seed);
  initial_ = game_->render();
  stack_.fill(preprocess(initial_, spec_));
  step_ = 0;
  score_ = 0.0;
  done_ = false;
  return stack_.state();
}

StepResult Environment::step(std::size_t action) {
  if (done_) throw std::logic_error("step called on a finished episode; call reset first");
  if (action >= spec_.num_actions()) {
    throw std::out_of_range("action " + std::to_string(action) + " not in action set of size " +
                            std::to_string(spec_.num_actions()));
  }
  StepResult result;
  result.observations.reserve(spec_.frame_skip);
  for (std::size_t i = 0; i < spec_.frame_skip; ++i) {
    result.reward += game_->advance(action);
    result.observations.push_back(game_->render());
    stack_.push(preprocess(result.observations.back(), spec_));
  }
  score_ += result.reward;
  ++step_;
  if (step_ >= spec_.horizon) {
    done_ = true;
    if (spec_.win_lose_terminal) {
      result.terminal = score_ < 0.0 ? Terminal::Lose : Terminal::Win;
    } else {
      result.terminal = Terminal::Horizon;
    }
  }
  result.done = done_;
  result.state = stack_.state();
  return result;
}

}  // namespace uaplab::env

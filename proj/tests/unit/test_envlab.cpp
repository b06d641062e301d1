#include <gtest/gtest.h>

#include <sstream>

#include "uaplab/envlab/environment.hpp"
#include "uaplab/envlab/trace.hpp"

namespace {

using namespace uaplab;
using env::Environment;

env::RawObservation raw_frame(const env::EnvSpec& spec, auto pixel) {
  env::RawObservation o;
  o.height = spec.raw_height;
  o.width = spec.raw_width;
  o.pixels.resize(o.height * o.width);
  for (std::size_t y = 0; y < o.height; ++y) {
    for (std::size_t x = 0; x < o.width; ++x) o.pixels[y * o.width + x] = pixel(y, x);
  }
  return o;
}

env::EpisodeTrace play(const env::EnvSpec& spec, std::uint64_t seed, const std::vector<std::size_t>& actions) {
  Environment e(spec);
  e.reset(seed);
  env::EpisodeTrace trace;
  trace.seed = seed;
  for (std::size_t t = 0; !e.done(); ++t) {
    const auto res = e.step(actions[t % actions.size()]);
    trace.record(actions[t % actions.size()], res.reward);
    trace.terminal = res.terminal;
  }
  return trace;
}

TEST(Reset, SameSeedSameState) {
  Environment a(env::catch_spec());
  Environment b(env::catch_spec());
  EXPECT_EQ(a.reset(7), b.reset(7));
}

TEST(Reset, StackStartsWithRepeatedFrame) {
  Environment e(env::corridor_spec());
  const num::Tensor s = e.reset(0);
  ASSERT_EQ(s.shape(), (num::Shape{4, 16, 16}));
  const std::size_t fs = 16 * 16;
  for (std::size_t slot = 1; slot < 4; ++slot) {
    for (std::size_t i = 0; i < fs; ++i) ASSERT_EQ(s[slot * fs + i], s[i]);
  }
}

TEST(Reset, ZeroGridRejected) {
  env::EnvSpec spec = env::catch_spec();
  spec.grid_height = 0;
  spec.grid_width = 0;
  EXPECT_THROW(Environment{spec}, std::invalid_argument);
}

TEST(Spec, RejectsBadRateAndHorizon) {
  env::EnvSpec spec = env::catch_spec();
  spec.frame_rate = 0;
  EXPECT_THROW(spec.validate(), std::invalid_argument);
  spec = env::catch_spec();
  spec.horizon = 0;
  EXPECT_THROW(spec.validate(), std::invalid_argument);
}

TEST(Preprocess, White) {
  const auto spec = env::catch_spec();
  const num::Tensor f = env::preprocess(raw_frame(spec, [](auto, auto) { return 255.0; }), spec);
  EXPECT_EQ(f, num::Tensor::filled({16, 16}, 1.0));
}

TEST(Preprocess, Black) {
  const auto spec = env::catch_spec();
  const num::Tensor f = env::preprocess(raw_frame(spec, [](auto, auto) { return 0.0; }), spec);
  EXPECT_EQ(f, num::Tensor::filled({16, 16}, 0.0));
}

TEST(Preprocess, Checkerboard) {
  // One checker square per preprocessed pixel (a 2x2 raw block).
  const auto spec = env::catch_spec();
  const auto obs = raw_frame(spec, [](std::size_t y, std::size_t x) { return ((y / 2 + x / 2) % 2) * 255.0; });
  const num::Tensor f = env::preprocess(obs, spec);
  for (std::size_t y = 0; y < 16; ++y) {
    for (std::size_t x = 0; x < 16; ++x) ASSERT_EQ(f[y * 16 + x], static_cast<double>((y + x) % 2));
  }
}

TEST(Preprocess, RejectsOutOfRangePixels) {
  const auto spec = env::catch_spec();
  EXPECT_THROW(env::preprocess(raw_frame(spec, [](auto, auto) { return 300.0; }), spec), std::invalid_argument);
}

TEST(Catch, RewardSignFollowsPaddleAtContact) {
  const auto spec = env::catch_spec();
  std::size_t caught = 0;
  std::size_t missed = 0;
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    env::CatchGame game(spec);
    game.reset(seed);
    const std::size_t action = seed % 3;  // left, stay or right all episode
    for (int frame = 0; frame < 200; ++frame) {
      const std::size_t col = game.ball_col();
      const double r = game.advance(action);
      if (r == 0.0) continue;
      const std::size_t paddle = game.paddle_center();
      const std::size_t gap = col > paddle ? col - paddle : paddle - col;
      EXPECT_EQ(r, gap <= env::CatchGame::kPaddleHalfWidth ? 1.0 : -1.0);
      EXPECT_EQ(game.ball_row(), 0u) << "ball respawns at the top";
      (r > 0 ? caught : missed) += 1;
    }
  }
  EXPECT_GT(caught, 0u);
  EXPECT_GT(missed, 0u);
}

TEST(Catch, LosesWhenScoreNegativeAtHorizon) {
  env::EnvSpec spec = env::catch_spec();
  const auto trace = play(spec, 3, {0});  // hug the left wall
  EXPECT_LT(trace.total_return, 0.0);
  EXPECT_EQ(trace.terminal, env::Terminal::Lose);
  EXPECT_EQ(trace.actions.size(), spec.horizon);
}

TEST(Corridor, CrossingRewardsAndContinues) {
  const auto spec = env::corridor_spec();
  Environment e(spec);
  e.reset(0);
  bool crossed = false;
  while (!e.done()) {
    const auto res = e.step(0);
    if (res.reward > 0) {
      crossed = true;
      EXPECT_EQ(res.reward, 1.0);
      if (e.decision_step() < spec.horizon) {
        EXPECT_FALSE(res.done);
      }
    }
    EXPECT_GE(res.reward, 0.0);
  }
  EXPECT_TRUE(crossed);
  EXPECT_EQ(e.decision_step(), spec.horizon);
}

TEST(Step, WindowStacksItsFrames) {
  const auto spec = env::catch_spec();
  Environment e(spec);
  e.reset(5);
  const auto res = e.step(2);
  ASSERT_EQ(res.observations.size(), spec.frame_skip);
  const std::size_t fs = spec.height * spec.width;
  for (std::size_t j = 0; j < spec.frame_skip; ++j) {
    const num::Tensor f = env::preprocess(res.observations[j], spec);
    for (std::size_t i = 0; i < fs; ++i) ASSERT_EQ(res.state[j * fs + i], f[i]);
    EXPECT_EQ(res.observations[j].step_index, j + 1);
  }
}

TEST(Step, RewardIsWindowSum) {
  const auto spec = env::catch_spec();
  Environment e(spec);
  e.reset(9);
  env::CatchGame game(spec);
  game.reset(9);
  while (!e.done()) {
    double expect = 0.0;
    for (std::size_t i = 0; i < spec.frame_skip; ++i) expect += game.advance(1);
    EXPECT_EQ(e.step(1).reward, expect);
  }
}

TEST(Step, FinishedEpisodeRejected) {
  env::EnvSpec spec = env::catch_spec();
  spec.horizon = 2;
  Environment e(spec);
  e.reset(1);
  e.step(1);
  EXPECT_TRUE(e.step(1).done);
  EXPECT_THROW(e.step(1), std::logic_error);
}

TEST(Step, BadActionRejected) {
  Environment e(env::catch_spec());
  e.reset(1);
  EXPECT_THROW(e.step(3), std::out_of_range);
}

TEST(Episodes, FullDeterminism) {
  for (const auto& spec : {env::catch_spec(), env::corridor_spec()}) {
    const std::vector<std::size_t> actions{0, 2, 2, 1, 0, 1, 2};
    EXPECT_EQ(play(spec, 42, actions), play(spec, 42, actions));
  }
}

TEST(Episodes, EveryStateValid) {
  for (const auto& spec : {env::catch_spec(), env::corridor_spec()}) {
    Environment e(spec);
    env::validate_state(e.reset(11), spec);
    for (std::size_t t = 0; !e.done(); ++t) env::validate_state(e.step(t % 3).state, spec);
  }
}

TEST(Validator, RejectsBadStates) {
  const auto spec = env::catch_spec();
  EXPECT_THROW(env::validate_state(num::Tensor({4, 16, 15}), spec), std::invalid_argument);
  EXPECT_THROW(env::validate_state(num::Tensor::filled({4, 16, 16}, 1.5), spec), std::invalid_argument);
}

TEST(Trace, RoundTrip) {
  const auto trace = play(env::catch_spec(), 8, {0, 1, 2, 2});
  std::stringstream buf;
  env::write_trace(buf, trace);
  const auto back = env::read_trace(buf);
  EXPECT_EQ(back, trace);
}

TEST(Trace, RejectsInconsistentReturn) {
  env::EpisodeTrace t;
  t.record(0, 1.0);
  t.total_return = 5.0;
  EXPECT_THROW(t.validate(), std::invalid_argument);
  std::stringstream buf("# uaplab-trace v1\n# seed 1 terminal win return 3\nstep action reward terminal\n0 1 1 1\n");
  EXPECT_THROW(env::read_trace(buf), std::exception);
}

}  // namespace

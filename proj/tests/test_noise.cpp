#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "realnav/error.hpp"
#include "realnav/noise.hpp"

using namespace realnav;

namespace {

double deg(double d) { return d * std::numbers::pi / 180.0; }

struct Moments {
  double mean = 0.0;
  double sd = 0.0;
};

template <class F>
Moments sample(int n, F draw) {
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = draw();
    sum += x;
    sum2 += x * x;
  }
  const double mean = sum / n;
  return {mean, std::sqrt(sum2 / n - mean * mean)};
}

}  // namespace

TEST(NoisePresets, TableValues) {
  struct Row {
    NoiseLevel level;
    double pos, ang, trans, rot;
  };
  const Row rows[] = {{NoiseLevel::kNone, 0.0, 0.0, 0.0, 0.0},
                      {NoiseLevel::kSmall, 0.20, deg(7), 0.05, deg(5)},
                      {NoiseLevel::kMedium, 0.40, deg(15), 0.10, deg(10)},
                      {NoiseLevel::kLarge, 0.80, deg(30), 0.20, deg(20)}};
  for (const Row& r : rows) {
    const NoiseConfig c = noise_preset(r.level, r.level);
    EXPECT_DOUBLE_EQ(c.sensor_pos_sigma, r.pos);
    EXPECT_DOUBLE_EQ(c.sensor_ang_sigma, r.ang);
    EXPECT_DOUBLE_EQ(c.act_trans_sigma, r.trans);
    EXPECT_DOUBLE_EQ(c.act_rot_sigma, r.rot);
    EXPECT_EQ(parse_noise_level(noise_level_name(r.level)), r.level);
  }
  const NoiseConfig mixed = noise_preset(NoiseLevel::kLarge, NoiseLevel::kNone);
  EXPECT_DOUBLE_EQ(mixed.sensor_pos_sigma, 0.80);
  EXPECT_DOUBLE_EQ(mixed.act_trans_sigma, 0.0);
  EXPECT_THROW(parse_noise_level("huge"), Error);
}

TEST(NoiseConfig, Validation) {
  NoiseConfig c;
  EXPECT_NO_THROW(c.validate());
  c.act_rot_sigma = -0.1;
  EXPECT_THROW(c.validate(), Error);
  c.act_rot_sigma = std::nan("");
  EXPECT_THROW(c.validate(), Error);
}

TEST(SensorNoise, ZeroSigmaIsIdentity) {
  Rng rng(40);
  const Pose3 p{1.25, -3.5, Heading::from_angle(0.77)};
  for (int i = 0; i < 100; ++i) EXPECT_EQ(apply_sensor_noise(p, NoiseConfig{}, rng), p);
}

TEST(SensorNoise, RadialMagnitudeAndHeadingSpread) {
  NoiseConfig c;
  set_sensor_level(c, NoiseLevel::kSmall);
  Rng rng(41);
  const Pose3 p{0.0, 0.0, Heading::from_angle(0.0)};
  const int n = 200000;
  double sum_mag = 0.0;
  double sum_x = 0.0, sum_z = 0.0;
  double sum_a2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const Pose3 q = apply_sensor_noise(p, c, rng);
    sum_mag += std::hypot(q.x, q.z);
    sum_x += q.x;
    sum_z += q.z;
    const double a = q.heading.angle();
    sum_a2 += a * a;
  }
  // Half-normal mean sigma*sqrt(2/pi) gives the underlying sigma back.
  EXPECT_NEAR(sum_mag / n / std::sqrt(2.0 / std::numbers::pi), 0.20, 0.20 * 0.01);
  EXPECT_NEAR(sum_x / n, 0.0, 0.003);  // direction uniform
  EXPECT_NEAR(sum_z / n, 0.0, 0.003);
  EXPECT_NEAR(std::sqrt(sum_a2 / n), deg(7), deg(7) * 0.01);
}

TEST(ActuationNoise, NoiseFreeActions) {
  Rng rng(42);
  const NoiseConfig zero;
  const auto mv = apply_actuation_noise(Action::kMoveForward, zero, rng);
  EXPECT_EQ(mv.distance, 0.25);
  EXPECT_EQ(mv.rotation, 0.0);
  EXPECT_EQ(apply_actuation_noise(Action::kTurnLeft, zero, rng).rotation, deg(10));
  EXPECT_EQ(apply_actuation_noise(Action::kTurnRight, zero, rng).rotation, -deg(10));
  EXPECT_EQ(apply_actuation_noise(Action::kTurnLeft, zero, rng).distance, 0.0);
  try {
    apply_actuation_noise(Action::kStop, zero, rng);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidArgument);
  }
}

TEST(ActuationNoise, MoveDistanceStatistics) {
  NoiseConfig c;
  set_actuator_level(c, NoiseLevel::kMedium);
  Rng rng(43);
  const Moments m = sample(200000, [&] {
    return apply_actuation_noise(Action::kMoveForward, c, rng).sampled_distance;
  });
  EXPECT_NEAR(m.mean, 0.25, 0.001);
  EXPECT_NEAR(m.sd, 0.10, 0.10 * 0.01);
}

TEST(ActuationNoise, RealizedDistanceIsNeverNegative) {
  NoiseConfig c;
  c.act_trans_sigma = 1.0;
  Rng rng(44);
  for (int i = 0; i < 10000; ++i) {
    const auto o = apply_actuation_noise(Action::kMoveForward, c, rng);
    EXPECT_GE(o.distance, 0.0);
    EXPECT_EQ(o.distance, std::max(0.0, o.sampled_distance));
  }
}

TEST(ActuationNoise, TurnStatistics) {
  NoiseConfig c;
  set_actuator_level(c, NoiseLevel::kLarge);
  Rng rng(45);
  const Moments m = sample(200000, [&] {
    return apply_actuation_noise(Action::kTurnLeft, c, rng).rotation;
  });
  EXPECT_NEAR(m.mean, deg(10), deg(0.2));
  EXPECT_NEAR(m.sd, deg(20), deg(20) * 0.01);
}

TEST(ActuationNoise, DriftOnMoveCanBeDisabled) {
  NoiseConfig c;
  set_actuator_level(c, NoiseLevel::kLarge);
  c.drift_on_move = false;
  Rng rng(46);
  for (int i = 0; i < 100; ++i) {
    EXPECT_EQ(apply_actuation_noise(Action::kMoveForward, c, rng).rotation, 0.0);
  }
}

TEST(Actions, Names) {
  for (Action a : {Action::kMoveForward, Action::kTurnLeft, Action::kTurnRight, Action::kStop}) {
    EXPECT_EQ(parse_action(action_name(a)), a);
  }
  EXPECT_EQ(action_name(Action::kMoveForward), "MOVE_FORWARD");
  EXPECT_FALSE(parse_action("move_forward").has_value());
  EXPECT_FALSE(parse_action("JUMP").has_value());
}

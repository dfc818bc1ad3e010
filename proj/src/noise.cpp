#include "realnav/noise.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "realnav/error.hpp"

namespace realnav {

namespace {
constexpr double deg(double d) { return d * std::numbers::pi / 180.0; }

double gaussian(Rng& rng, double sigma) {
  if (sigma == 0.0) return 0.0;
  return std::normal_distribution<double>(0.0, sigma)(rng);
}
}  // namespace

void NoiseConfig::validate() const {
  for (const double s :
       {sensor_pos_sigma, sensor_ang_sigma, act_trans_sigma, act_rot_sigma}) {
    if (!(s >= 0.0) || !std::isfinite(s)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "noise sigmas must be finite and >= 0");
    }
  }
}

std::string_view noise_level_name(NoiseLevel level) noexcept {
  switch (level) {
    case NoiseLevel::kNone: return "none";
    case NoiseLevel::kSmall: return "small";
    case NoiseLevel::kMedium: return "medium";
    case NoiseLevel::kLarge: return "large";
  }
  return "none";
}

NoiseLevel parse_noise_level(std::string_view name) {
  if (name == "none") return NoiseLevel::kNone;
  if (name == "small") return NoiseLevel::kSmall;
  if (name == "medium") return NoiseLevel::kMedium;
  if (name == "large") return NoiseLevel::kLarge;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown noise level '" + std::string(name) +
                  "' (expected none|small|medium|large)");
}

void set_sensor_level(NoiseConfig& cfg, NoiseLevel level) {
  switch (level) {
    case NoiseLevel::kNone: cfg.sensor_pos_sigma = 0.0; cfg.sensor_ang_sigma = 0.0; break;
    case NoiseLevel::kSmall: cfg.sensor_pos_sigma = 0.20; cfg.sensor_ang_sigma = deg(7); break;
    case NoiseLevel::kMedium: cfg.sensor_pos_sigma = 0.40; cfg.sensor_ang_sigma = deg(15); break;
    case NoiseLevel::kLarge: cfg.sensor_pos_sigma = 0.80; cfg.sensor_ang_sigma = deg(30); break;
  }
}

void set_actuator_level(NoiseConfig& cfg, NoiseLevel level) {
  switch (level) {
    case NoiseLevel::kNone: cfg.act_trans_sigma = 0.0; cfg.act_rot_sigma = 0.0; break;
    case NoiseLevel::kSmall: cfg.act_trans_sigma = 0.05; cfg.act_rot_sigma = deg(5); break;
    case NoiseLevel::kMedium: cfg.act_trans_sigma = 0.10; cfg.act_rot_sigma = deg(10); break;
    case NoiseLevel::kLarge: cfg.act_trans_sigma = 0.20; cfg.act_rot_sigma = deg(20); break;
  }
}

NoiseConfig noise_preset(NoiseLevel sensor, NoiseLevel actuator) {
  NoiseConfig cfg;
  set_sensor_level(cfg, sensor);
  set_actuator_level(cfg, actuator);
  return cfg;
}

Pose3 apply_sensor_noise(const Pose3& true_pose, const NoiseConfig& cfg, Rng& rng) {
  Pose3 out = true_pose;
  if (cfg.sensor_pos_sigma > 0.0) {
    const double direction =
        std::uniform_real_distribution<double>(0.0, 2.0 * std::numbers::pi)(rng);
    const double magnitude = std::abs(gaussian(rng, cfg.sensor_pos_sigma));
    out.x += magnitude * std::cos(direction);
    out.z += magnitude * std::sin(direction);
  }
  if (cfg.sensor_ang_sigma > 0.0) {
    out.heading = out.heading.rotated(gaussian(rng, cfg.sensor_ang_sigma));
  }
  return out;
}

ActuationOutcome apply_actuation_noise(Action action, const NoiseConfig& cfg,
                                       Rng& rng) {
  ActuationOutcome out;
  switch (action) {
    case Action::kStop:
      throw Error(ErrorCode::kInvalidArgument, "STOP has no actuation");
    case Action::kMoveForward:
      out.sampled_distance = kMoveDistance + gaussian(rng, cfg.act_trans_sigma);
      out.distance = std::max(0.0, out.sampled_distance);
      if (cfg.drift_on_move) out.rotation = gaussian(rng, cfg.act_rot_sigma);
      break;
    case Action::kTurnLeft:
      out.rotation = kTurnAngle + gaussian(rng, cfg.act_rot_sigma);
      break;
    case Action::kTurnRight:
      out.rotation = -kTurnAngle + gaussian(rng, cfg.act_rot_sigma);
      break;
  }
  return out;
}

}  // namespace realnav

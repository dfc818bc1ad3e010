#pragma once

#include <random>
#include <string_view>

#include "realnav/action.hpp"
#include "realnav/geometry.hpp"

namespace realnav {

using Rng = std::mt19937_64;

/// Standard deviations of the Gaussian sensor and actuator noise models.
struct NoiseConfig {
  double sensor_pos_sigma = 0.0;  // meters, radial
  double sensor_ang_sigma = 0.0;  // radians
  double act_trans_sigma = 0.0;   // meters
  double act_rot_sigma = 0.0;     // radians
  /// Apply rotational actuation noise to straight moves as well as turns.
  bool drift_on_move = true;

  /// Throws kInvalidArgument for a negative or non-finite sigma.
  void validate() const;
  bool sensor_free() const noexcept {
    return sensor_pos_sigma == 0.0 && sensor_ang_sigma == 0.0;
  }
};

enum class NoiseLevel { kNone, kSmall, kMedium, kLarge };

std::string_view noise_level_name(NoiseLevel level) noexcept;
/// Accepts none|small|medium|large; throws kInvalidArgument otherwise.
NoiseLevel parse_noise_level(std::string_view name);

/// Localization sigmas: small (0.20 m, 7 deg), medium (0.40 m, 15 deg),
/// large (0.80 m, 30 deg).
void set_sensor_level(NoiseConfig& cfg, NoiseLevel level);
/// Actuation sigmas: small (0.05 m, 5 deg), medium (0.10 m, 10 deg),
/// large (0.20 m, 20 deg).
void set_actuator_level(NoiseConfig& cfg, NoiseLevel level);
NoiseConfig noise_preset(NoiseLevel sensor, NoiseLevel actuator);

/// Noisy reading of `true_pose`: position displaced along a uniform direction
/// by |N(0, sensor_pos_sigma)|, heading rotated by N(0, sensor_ang_sigma).
Pose3 apply_sensor_noise(const Pose3& true_pose, const NoiseConfig& cfg, Rng& rng);

/// Realized motion of one commanded action.
struct ActuationOutcome {
  /// Distance handed to attempt_move (clamped at 0); zero for turns.
  double distance = 0.0;
  /// Rotation applied to the heading: before translation for moves.
  double rotation = 0.0;
  /// Unclamped Gaussian sample of the move distance (0.25 + noise).
  double sampled_distance = 0.0;
};

/// Throws kInvalidArgument for STOP, which is noise-free.
ActuationOutcome apply_actuation_noise(Action action, const NoiseConfig& cfg,
                                       Rng& rng);

}  // namespace realnav

#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "realnav/action.hpp"
#include "realnav/geometry.hpp"
#include "realnav/noise.hpp"
#include "realnav/retrieval.hpp"
#include "realnav/world_map.hpp"

namespace realnav {

enum class ObservationMode { kVirtual, kReal, kHybrid };

std::string_view observation_mode_name(ObservationMode mode) noexcept;
ObservationMode parse_observation_mode(std::string_view name);

struct SimConfig {
  int max_steps = 200;
  double success_radius = 0.20;
  ObservationMode mode = ObservationMode::kReal;
  NoiseConfig noise;
  std::uint64_t seed = 0;

  void validate() const;
};

struct EpisodeSpec {
  std::int64_t id = 0;
  Pose3 start;
  Point2 goal;
  double geodesic = 0.0;

  friend bool operator==(const EpisodeSpec&, const EpisodeSpec&) = default;
};

/// What the agent receives before each decision.
struct StepObservation {
  /// Retrieved real image (real and hybrid modes) or the renderer tag
  /// (virtual mode).
  std::string image_ref;
  /// Renderer tag for the virtual view (virtual and hybrid modes).
  std::string virtual_tag;
  std::optional<std::int64_t> record_id;
  bool retrieval_fallback = false;
  /// Goal relative to the perceived pose.
  GoalVector goal;
  std::optional<Action> prev_action;
  int step = 0;
  /// Localization reading (noisy). Available to in-process policies only.
  Pose3 agent_pose;
};

struct TrajectoryStep {
  int index = 0;
  Pose3 true_pose;
  Pose3 perceived_pose;
  Action action = Action::kStop;
  std::optional<std::int64_t> record_id;
  bool retrieval_fallback = false;
};

enum class Outcome { kSuccess, kFailure, kAborted };
std::string_view outcome_name(Outcome o) noexcept;

struct Trajectory {
  EpisodeSpec spec;
  std::vector<TrajectoryStep> steps;
  Outcome outcome = Outcome::kFailure;
  double final_distance = 0.0;
  double path_length = 0.0;
  Pose3 final_pose;
  /// Set for aborted episodes.
  std::string error;
};

/// Shared read-only simulation inputs. `index` may be null in virtual mode.
struct World {
  const OccupancyGrid* grid = nullptr;
  const RetrievalIndex* index = nullptr;
};

/// Rejection-samples `n` episodes whose start and goal are navigable, connected,
/// and have geodesic/euclidean > min_ratio; start heading uniform in [0, 2pi).
/// Throws kInfeasibleMap after `max_rejections` consecutive rejections.
std::vector<EpisodeSpec> generate_episodes(const OccupancyGrid& grid,
                                           std::size_t n, double min_ratio,
                                           Rng& rng,
                                           std::size_t max_rejections = 1'000'000);

/// Deterministic per-(seed, episode, step, stream) random engine. Streams keep
/// sensor, actuator and policy draws independent of each other.
enum class RngStream : std::uint32_t { kSensor = 0, kActuator = 1, kPolicy = 2 };
Rng step_rng(std::uint64_t seed, std::int64_t episode_id, std::int64_t step,
             RngStream stream);

/// One running episode: observe -> act -> transition.
class Episode {
 public:
  Episode(const EpisodeSpec& spec, const World& world, const SimConfig& cfg);

  bool done() const noexcept { return done_; }
  /// Observation for the next decision; valid while !done().
  const StepObservation& observation() const noexcept { return obs_; }
  const Pose3& true_pose() const noexcept { return pose_; }

  /// Applies one action. STOP ends the episode (success iff within the success
  /// radius); reaching max_steps ends it as a failure. Throws kProtocol when
  /// the episode is already over.
  void step(Action action);

  const Trajectory& trajectory() const noexcept { return traj_; }
  Trajectory take_trajectory() { return std::move(traj_); }

 private:
  void observe();
  void finish(Outcome outcome);

  World world_;
  SimConfig cfg_;
  Pose3 pose_;
  StepObservation obs_;
  Trajectory traj_;
  int step_ = 0;
  bool done_ = false;
};

class Policy {
 public:
  virtual ~Policy() = default;
  virtual void reset(const EpisodeSpec& /*spec*/) {}
  virtual Action act(const StepObservation& obs) = 0;
  virtual void episode_finished(const Trajectory& /*trajectory*/) {}
};

/// Creates one policy instance per worker thread.
using PolicyFactory = std::function<std::unique_ptr<Policy>()>;

/// Runs one episode to completion. Policy exceptions abort the episode
/// (recorded in the trajectory), they do not propagate.
Trajectory run_episode(Policy& policy, const EpisodeSpec& spec,
                       const World& world, const SimConfig& cfg);

/// Runs all episodes, on up to `jobs` threads; output order matches `specs`
/// and does not depend on `jobs`.
std::vector<Trajectory> run_suite(const PolicyFactory& factory,
                                  std::span<const EpisodeSpec> specs,
                                  const World& world, const SimConfig& cfg,
                                  int jobs = 1);

/// Privileged upper-bound baseline: replans every step from the perceived pose
/// over a wall-penalized distance field toward the goal, aims at the farthest
/// visible waypoint, turns until aligned within 5 deg, then moves; stops when
/// the perceived goal distance is within 0.75 * success_radius.
class OraclePolicy : public Policy {
 public:
  OraclePolicy(const OccupancyGrid& grid, double success_radius);

  void reset(const EpisodeSpec& spec) override;
  Action act(const StepObservation& obs) override;

  /// Point the policy is steering toward from `pose` (exposed for tests).
  Point2 steering_target(const Pose3& pose) const;

 private:
  bool clear_line(const Point2& a, const Point2& b) const;

  const OccupancyGrid* grid_;
  double success_radius_;
  std::vector<double> cell_cost_;
  std::vector<double> field_;
  Point2 goal_;
  Cell goal_cell_;
};

/// Lower-bound baseline: uniform over the three motion actions; STOP only once
/// the observed goal distance is within the success radius.
class RandomPolicy : public Policy {
 public:
  RandomPolicy(std::uint64_t seed, double success_radius);
  void reset(const EpisodeSpec& spec) override;
  Action act(const StepObservation& obs) override;

 private:
  std::uint64_t seed_;
  double success_radius_;
  std::int64_t episode_ = 0;
};

/// Scripted baseline that sees only the goal vector: STOP within 0.15 m, turn
/// toward the goal while |bearing| > 5 deg, otherwise move forward.
class GreedyPolicy : public Policy {
 public:
  Action act(const StepObservation& obs) override;
};

Action greedy_decision(double goal_distance, double goal_bearing) noexcept;

}  // namespace realnav

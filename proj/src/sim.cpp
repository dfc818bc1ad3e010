#include "realnav/sim.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <numbers>
#include <thread>

#include "realnav/error.hpp"

namespace realnav {

namespace {

constexpr double kAlignTolerance = 5.0 * std::numbers::pi / 180.0;
constexpr double kLookahead = 3.0;   // meters
constexpr double kClearance = 0.10;  // meters, lateral margin for shortcuts

std::string virtual_tag(const Pose3& pose) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "virtual:%.6f,%.6f,%.6f", pose.x, pose.z,
                pose.heading.angle());
  return buf;
}

struct Neighbor {
  int dc, dr;
  bool diagonal;
};
constexpr std::array<Neighbor, 8> kNeighbors{{{1, 0, false},
                                               {-1, 0, false},
                                               {0, 1, false},
                                               {0, -1, false},
                                               {1, 1, true},
                                               {1, -1, true},
                                               {-1, 1, true},
                                               {-1, -1, true}}};

bool can_step(const OccupancyGrid& g, Cell c, const Neighbor& n) {
  if (!g.navigable({c.col + n.dc, c.row + n.dr})) return false;
  if (!n.diagonal) return true;
  return g.navigable({c.col + n.dc, c.row}) && g.navigable({c.col, c.row + n.dr});
}

}  // namespace

std::string_view observation_mode_name(ObservationMode mode) noexcept {
  switch (mode) {
    case ObservationMode::kVirtual: return "virtual";
    case ObservationMode::kReal: return "real";
    case ObservationMode::kHybrid: return "hybrid";
  }
  return "real";
}

ObservationMode parse_observation_mode(std::string_view name) {
  if (name == "virtual") return ObservationMode::kVirtual;
  if (name == "real") return ObservationMode::kReal;
  if (name == "hybrid") return ObservationMode::kHybrid;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown observation mode '" + std::string(name) +
                  "' (expected virtual|real|hybrid)");
}

std::string_view outcome_name(Outcome o) noexcept {
  switch (o) {
    case Outcome::kSuccess: return "success";
    case Outcome::kFailure: return "failure";
    case Outcome::kAborted: return "aborted";
  }
  return "failure";
}

void SimConfig::validate() const {
  if (max_steps < 1) throw Error(ErrorCode::kInvalidArgument, "max_steps must be >= 1");
  if (!(success_radius > 0.0) || !std::isfinite(success_radius)) {
    throw Error(ErrorCode::kInvalidArgument, "success_radius must be > 0");
  }
  noise.validate();
}

std::vector<EpisodeSpec> generate_episodes(const OccupancyGrid& grid,
                                           std::size_t n, double min_ratio,
                                           Rng& rng, std::size_t max_rejections) {
  if (!(min_ratio >= 0.0) || !std::isfinite(min_ratio)) {
    throw Error(ErrorCode::kInvalidArgument, "min_ratio must be finite and >= 0");
  }
  if (grid.navigable_cells().empty()) {
    throw Error(ErrorCode::kEmptyMap, "grid has no navigable cell");
  }
  std::uniform_real_distribution<double> heading(0.0, 2.0 * std::numbers::pi);
  std::vector<EpisodeSpec> out;
  out.reserve(n);
  std::size_t rejections = 0;
  while (out.size() < n) {
    const Point2 start = sample_navigable_point(grid, rng);
    const Point2 goal = sample_navigable_point(grid, rng);
    const double euclid = distance(start, goal);
    std::optional<double> geo;
    if (euclid > 0.0) geo = geodesic_distance(grid, start, goal);
    if (!geo || !(*geo / euclid > min_ratio)) {
      if (++rejections >= max_rejections) {
        throw Error(ErrorCode::kInfeasibleMap,
                    std::to_string(rejections) +
                        " consecutive rejections; no start/goal pair with "
                        "geodesic/euclidean > " +
                        std::to_string(min_ratio));
      }
      continue;
    }
    rejections = 0;
    EpisodeSpec spec;
    spec.id = static_cast<std::int64_t>(out.size());
    spec.start = {start.x, start.z, Heading::from_angle(heading(rng))};
    spec.goal = goal;
    spec.geodesic = *geo;
    out.push_back(spec);
  }
  return out;
}

Rng step_rng(std::uint64_t seed, std::int64_t episode_id, std::int64_t step,
             RngStream stream) {
  const auto id = static_cast<std::uint64_t>(episode_id);
  const auto st = static_cast<std::uint64_t>(step);
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(id),
                    static_cast<std::uint32_t>(id >> 32),
                    static_cast<std::uint32_t>(st),
                    static_cast<std::uint32_t>(st >> 32),
                    static_cast<std::uint32_t>(stream)};
  return Rng(seq);
}

// ---------------------------------------------------------------------------

Episode::Episode(const EpisodeSpec& spec, const World& world, const SimConfig& cfg)
    : world_(world), cfg_(cfg), pose_(spec.start) {
  cfg_.validate();
  if (world_.grid == nullptr) {
    throw Error(ErrorCode::kInvalidArgument, "world has no grid");
  }
  if (cfg_.mode != ObservationMode::kVirtual && world_.index == nullptr) {
    throw Error(ErrorCode::kInvalidArgument,
                "real and hybrid modes need an observation database");
  }
  if (!is_navigable(*world_.grid, spec.start.position()) ||
      !is_navigable(*world_.grid, spec.goal)) {
    throw Error(ErrorCode::kInvalidEndpoint,
                "episode " + std::to_string(spec.id) +
                    ": start and goal must be navigable");
  }
  traj_.spec = spec;
  traj_.final_pose = pose_;
  observe();
}

void Episode::observe() {
  Rng rng = step_rng(cfg_.seed, traj_.spec.id, step_, RngStream::kSensor);
  const Pose3 perceived = apply_sensor_noise(pose_, cfg_.noise, rng);
  obs_.agent_pose = perceived;
  obs_.goal = goal_vector(perceived, traj_.spec.goal);
  obs_.step = step_;
  obs_.virtual_tag.clear();
  obs_.image_ref.clear();
  obs_.record_id.reset();
  obs_.retrieval_fallback = false;
  if (cfg_.mode != ObservationMode::kReal) obs_.virtual_tag = virtual_tag(pose_);
  if (cfg_.mode == ObservationMode::kVirtual) {
    obs_.image_ref = obs_.virtual_tag;
  } else {
    const RetrievalResult r = world_.index->retrieve(perceived);
    obs_.image_ref = r.record->image_ref;
    obs_.record_id = r.record->id;
    obs_.retrieval_fallback = r.fallback;
  }
}

void Episode::finish(Outcome outcome) {
  done_ = true;
  traj_.outcome = outcome;
  traj_.final_pose = pose_;
  traj_.final_distance = distance(pose_.position(), traj_.spec.goal);
}

void Episode::step(Action action) {
  if (done_) {
    throw Error(ErrorCode::kProtocol,
                "episode " + std::to_string(traj_.spec.id) + " is already over");
  }
  TrajectoryStep rec;
  rec.index = step_;
  rec.true_pose = pose_;
  rec.perceived_pose = obs_.agent_pose;
  rec.action = action;
  rec.record_id = obs_.record_id;
  rec.retrieval_fallback = obs_.retrieval_fallback;
  traj_.steps.push_back(rec);

  if (action == Action::kStop) {
    finish(Outcome::kFailure);
    if (traj_.final_distance <= cfg_.success_radius) traj_.outcome = Outcome::kSuccess;
    return;
  }

  Rng rng = step_rng(cfg_.seed, traj_.spec.id, step_, RngStream::kActuator);
  const ActuationOutcome act = apply_actuation_noise(action, cfg_.noise, rng);
  Pose3 next = pose_;
  next.heading = next.heading.rotated(act.rotation);
  if (action == Action::kMoveForward) next = attempt_move(*world_.grid, next, act.distance);
  traj_.path_length += distance(pose_.position(), next.position());
  pose_ = next;
  ++step_;
  obs_.prev_action = action;

  if (step_ >= cfg_.max_steps) {
    finish(Outcome::kFailure);
    return;
  }
  observe();
}

Trajectory run_episode(Policy& policy, const EpisodeSpec& spec,
                       const World& world, const SimConfig& cfg) {
  Episode ep(spec, world, cfg);
  try {
    policy.reset(spec);
    while (!ep.done()) ep.step(policy.act(ep.observation()));
  } catch (const std::exception& e) {
    Trajectory t = ep.take_trajectory();
    t.outcome = Outcome::kAborted;
    t.final_pose = ep.true_pose();
    t.final_distance = distance(ep.true_pose().position(), spec.goal);
    t.error = e.what();
    return t;
  }
  Trajectory t = ep.take_trajectory();
  try {
    policy.episode_finished(t);
  } catch (const std::exception& e) {
    t.outcome = Outcome::kAborted;
    t.error = e.what();
  }
  return t;
}

std::vector<Trajectory> run_suite(const PolicyFactory& factory,
                                  std::span<const EpisodeSpec> specs,
                                  const World& world, const SimConfig& cfg,
                                  int jobs) {
  cfg.validate();
  std::vector<Trajectory> out(specs.size());
  const std::size_t workers =
      std::clamp<std::size_t>(static_cast<std::size_t>(std::max(jobs, 1)), 1,
                              std::max<std::size_t>(specs.size(), 1));
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;

  auto work = [&] {
    try {
      std::unique_ptr<Policy> policy = factory();
      for (std::size_t i = next++; i < specs.size(); i = next++) {
        out[i] = run_episode(*policy, specs[i], world, cfg);
      }
    } catch (...) {
      std::lock_guard lock(failure_mu);
      if (!failure) failure = std::current_exception();
      next = specs.size();
    }
  };

  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    pool.clear();
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

// ---------------------------------------------------------------------------

OraclePolicy::OraclePolicy(const OccupancyGrid& grid, double success_radius)
    : grid_(&grid), success_radius_(success_radius) {
  // Cells hugging walls are made more expensive so the planned corridor keeps
  // some clearance; straight-line shortcuts remove most of the detour.
  const int w = grid.width();
  const int h = grid.height();
  cell_cost_.assign(static_cast<std::size_t>(w) * h, 1.0);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      int ring = 3;
      for (int dr = -2; dr <= 2; ++dr) {
        for (int dc = -2; dc <= 2; ++dc) {
          if (!grid.navigable({c + dc, r + dr})) {
            ring = std::min(ring, std::max(std::abs(dc), std::abs(dr)));
          }
        }
      }
      double& cost = cell_cost_[grid.index({c, r})];
      if (ring == 1) cost = 3.0;
      if (ring == 2) cost = 1.5;
    }
  }
}

void OraclePolicy::reset(const EpisodeSpec& spec) {
  goal_ = spec.goal;
  const auto goal_cell = grid_->cell_of(goal_);
  if (!goal_cell || !grid_->navigable(*goal_cell)) {
    throw Error(ErrorCode::kInvalidEndpoint, "goal is not navigable");
  }
  goal_cell_ = *goal_cell;
  field_ = distance_field(*grid_, goal_cell_, cell_cost_);
}

bool OraclePolicy::clear_line(const Point2& a, const Point2& b) const {
  if (!segment_navigable(*grid_, a, b)) return false;
  const double len = distance(a, b);
  if (len < 1e-9) return true;
  const double dx = (b.x - a.x) / len;
  const double dz = (b.z - a.z) / len;
  // Side rails start a little ahead so a pose close to a wall can still leave it.
  const double skip = std::min(len, 2.0 * kClearance);
  for (const double s : {-kClearance, kClearance}) {
    const Point2 ra{a.x + dx * skip - dz * s, a.z + dz * skip + dx * s};
    const Point2 rb{b.x - dz * s, b.z + dx * s};
    if (!segment_navigable(*grid_, ra, rb)) return false;
  }
  return true;
}

Point2 OraclePolicy::steering_target(const Pose3& pose) const {
  const Point2 p = pose.position();
  if (distance(p, goal_) <= kLookahead && clear_line(p, goal_)) return goal_;

  auto cell = nearest_navigable_cell(*grid_, p);
  if (!cell) return goal_;
  if (!std::isfinite(field_[grid_->index(*cell)]) || *cell == goal_cell_) return goal_;

  const int max_cells =
      static_cast<int>(std::ceil(kLookahead / grid_->resolution())) + 1;
  std::optional<Point2> target;
  std::optional<Point2> first;
  Cell c = *cell;
  for (int i = 0; i < max_cells && !(c == goal_cell_); ++i) {
    double best = field_[grid_->index(c)];
    std::optional<Cell> down;
    for (const Neighbor& n : kNeighbors) {
      if (!can_step(*grid_, c, n)) continue;
      const Cell nc{c.col + n.dc, c.row + n.dr};
      const double f = field_[grid_->index(nc)];
      if (f < best) {
        best = f;
        down = nc;
      }
    }
    if (!down) break;
    c = *down;
    const Point2 center = c == goal_cell_ ? goal_ : grid_->center(c);
    if (!first) first = center;
    if (distance(p, center) > kLookahead || !clear_line(p, center)) {
      if (target) break;
      continue;
    }
    target = center;
  }
  if (target) return *target;
  if (first) return *first;
  return goal_;
}

Action OraclePolicy::act(const StepObservation& obs) {
  if (obs.goal.distance <= 0.75 * success_radius_) return Action::kStop;
  const Point2 target = steering_target(obs.agent_pose);
  const double bearing = goal_vector(obs.agent_pose, target).bearing;
  if (bearing > kAlignTolerance) return Action::kTurnLeft;
  if (bearing < -kAlignTolerance) return Action::kTurnRight;
  return Action::kMoveForward;
}

RandomPolicy::RandomPolicy(std::uint64_t seed, double success_radius)
    : seed_(seed), success_radius_(success_radius) {}

void RandomPolicy::reset(const EpisodeSpec& spec) { episode_ = spec.id; }

Action RandomPolicy::act(const StepObservation& obs) {
  if (obs.goal.distance <= success_radius_) return Action::kStop;
  Rng rng = step_rng(seed_, episode_, obs.step, RngStream::kPolicy);
  switch (std::uniform_int_distribution<int>(0, 2)(rng)) {
    case 0: return Action::kMoveForward;
    case 1: return Action::kTurnLeft;
    default: return Action::kTurnRight;
  }
}

Action greedy_decision(double goal_distance, double goal_bearing) noexcept {
  if (goal_distance <= 0.15) return Action::kStop;
  if (goal_bearing > kAlignTolerance) return Action::kTurnLeft;
  if (goal_bearing < -kAlignTolerance) return Action::kTurnRight;
  return Action::kMoveForward;
}

Action GreedyPolicy::act(const StepObservation& obs) {
  return greedy_decision(obs.goal.distance, obs.goal.bearing);
}

}  // namespace realnav

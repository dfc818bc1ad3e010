#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "realnav/sim.hpp"

namespace realnav {

/// Episode set: JSON lines with `id, start_x, start_z, start_theta, goal_x,
/// goal_z, geodesic` (theta in radians).
std::string format_episodes(std::span<const EpisodeSpec> specs);
std::vector<EpisodeSpec> parse_episodes(std::istream& in);
std::vector<EpisodeSpec> load_episodes(const std::filesystem::path& path);
void save_episodes(const std::filesystem::path& path,
                   std::span<const EpisodeSpec> specs);

/// Trajectory log: one `"type":"step"` line per action and one
/// `"type":"summary"` line per episode, in episode order.
std::string format_trajectory_log(std::span<const Trajectory> trajectories);
void save_trajectory_log(const std::filesystem::path& path,
                         std::span<const Trajectory> trajectories);

struct EpisodeSummary {
  std::int64_t id = 0;
  Outcome outcome = Outcome::kFailure;
  int steps = 0;
  double final_distance = 0.0;
  double path_length = 0.0;
  double geodesic = 0.0;
  std::string error;
};

EpisodeSummary summarize(const Trajectory& t);

/// Summary records of a trajectory log (step lines are skipped).
std::vector<EpisodeSummary> parse_trajectory_log(std::istream& in);
std::vector<EpisodeSummary> load_trajectory_log(const std::filesystem::path& path);

}  // namespace realnav

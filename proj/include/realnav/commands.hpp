#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "realnav/alignment.hpp"
#include "realnav/metrics.hpp"
#include "realnav/noise.hpp"
#include "realnav/sim.hpp"

namespace realnav {

namespace fs = std::filesystem;

struct AlignOptions {
  fs::path correspondences;
  fs::path images;  // SfM images.txt
  fs::path out;     // native database (JSON lines)
};

/// Estimates the reconstruction-to-map transform, applies it to every camera
/// pose, and writes the planar database.
AlignmentReport cmd_align(const AlignOptions& opt, std::ostream& log);

struct GenEpisodesOptions {
  fs::path map;
  fs::path out;
  std::size_t n = 1000;
  double min_ratio = 1.1;
  std::uint64_t seed = 0;
};

std::vector<EpisodeSpec> cmd_gen_episodes(const GenEpisodesOptions& opt, std::ostream& log);

struct RunOptions {
  fs::path map;
  fs::path db;
  fs::path episodes;
  fs::path out;
  /// oracle | random | greedy | cmd:<argv> | tcp:[HOST:]PORT
  std::string policy = "oracle";
  NoiseLevel noise_sensor = NoiseLevel::kNone;
  NoiseLevel noise_actuator = NoiseLevel::kNone;
  /// Per-sigma overrides of the presets (meters, radians).
  std::optional<double> sensor_pos_sigma;
  std::optional<double> sensor_ang_sigma;
  std::optional<double> act_trans_sigma;
  std::optional<double> act_rot_sigma;
  double cos_threshold = 0.96;
  int max_steps = 200;
  double success_radius = 0.20;
  std::uint64_t seed = 0;
  int jobs = 1;
  ObservationMode mode = ObservationMode::kReal;
  double policy_timeout = 30.0;  // seconds per message
  bool inline_images = false;
  std::optional<int> image_size;
};

struct RunSummary {
  std::size_t episodes = 0;
  std::size_t successes = 0;
  std::vector<std::int64_t> aborted;
  std::size_t fallback_retrievals = 0;
};

/// Runs the suite and writes the trajectory log once, after all episodes.
RunSummary cmd_run(const RunOptions& opt, std::ostream& log);

struct EvalOptions {
  fs::path log;
  fs::path out;        // JSON report (optional)
  fs::path histogram;  // CSV (optional)
  std::vector<double> edges = kDefaultHistogramEdges;
};

struct EvalSummary {
  MetricsReport report;
  std::vector<std::int64_t> aborted;
};

/// Throws kNoEpisodes when the log holds no evaluable episode. Aborted
/// episodes are excluded from the metrics and listed.
EvalSummary cmd_eval(const EvalOptions& opt, std::ostream& out);

struct FixtureOptions {
  fs::path dir;
  std::size_t db_count = 500;
  std::uint64_t seed = 7;
};

/// Writes the bundled synthetic fixture: demo and office maps, a synthetic
/// database for each, and an SfM export of the demo database with reference
/// correspondences.
void cmd_make_fixture(const FixtureOptions& opt, std::ostream& log);

/// Builds the per-worker policy factory for a policy spec.
PolicyFactory make_policy_factory(const std::string& spec, const OccupancyGrid& grid,
                                  const RunOptions& opt, const fs::path& image_root);

/// Whitespace-separated argv with single/double quotes.
std::vector<std::string> split_command(const std::string& command);

}  // namespace realnav

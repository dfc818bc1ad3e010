#include "realnav/commands.hpp"

#include <cmath>
#include <fstream>
#include <memory>
#include <numbers>
#include <ostream>
#include <sstream>

#include "realnav/error.hpp"
#include "realnav/fixtures.hpp"
#include "realnav/observation_db.hpp"
#include "realnav/protocol.hpp"
#include "realnav/retrieval.hpp"
#include "realnav/sim_io.hpp"
#include "text_util.hpp"

namespace realnav {

namespace {

void require(const fs::path& p, const char* flag) {
  if (p.empty()) throw Error(ErrorCode::kInvalidArgument, std::string(flag) + " is required");
}

void save_grid(const fs::path& path, const OccupancyGrid& grid) {
  std::ostringstream ss;
  write_grid(ss, grid);
  detail::write_file_atomically(path, ss.str());
}

std::string join_ids(const std::vector<std::int64_t>& ids) {
  std::string s;
  for (const auto id : ids) {
    if (!s.empty()) s += ",";
    s += std::to_string(id);
  }
  return s;
}

}  // namespace

std::vector<std::string> split_command(const std::string& command) {
  std::vector<std::string> out;
  std::string cur;
  bool have = false;
  char quote = 0;
  for (const char ch : command) {
    if (quote) {
      if (ch == quote) {
        quote = 0;
      } else {
        cur += ch;
      }
    } else if (ch == '\'' || ch == '"') {
      quote = ch;
      have = true;
    } else if (std::isspace(static_cast<unsigned char>(ch))) {
      if (have) out.push_back(std::move(cur));
      cur.clear();
      have = false;
    } else {
      cur += ch;
      have = true;
    }
  }
  if (quote) throw Error(ErrorCode::kInvalidArgument, "unterminated quote in policy command");
  if (have) out.push_back(std::move(cur));
  return out;
}

AlignmentReport cmd_align(const AlignOptions& opt, std::ostream& log) {
  require(opt.correspondences, "--correspondences");
  require(opt.images, "--images");
  require(opt.out, "--out");
  const auto pairs = load_correspondences(opt.correspondences);
  const AlignmentReport report = estimate_similarity(pairs);

  std::ifstream in(opt.images);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + opt.images.string());
  std::vector<ObservationRecord> records;
  for (auto& img : parse_sfm_poses(in)) {
    records.push_back({img.id, std::move(img.name),
                       pose6_to_pose3(align_pose(img.pose, report.transform))});
  }
  save_database(opt.out, records);

  char line[160];
  std::snprintf(line, sizeof line,
                "aligned %zu images with %zu correspondences: scale %.6f, yaw %.4f deg, "
                "rmse %.6g m\n",
                records.size(), report.n_points, report.transform.scale,
                report.transform.yaw() * 180.0 / std::numbers::pi, report.rmse);
  log << line;
  return report;
}

std::vector<EpisodeSpec> cmd_gen_episodes(const GenEpisodesOptions& opt, std::ostream& log) {
  require(opt.map, "--map");
  require(opt.out, "--out");
  const OccupancyGrid grid = load_grid(opt.map);
  Rng rng(opt.seed);
  auto specs = generate_episodes(grid, opt.n, opt.min_ratio, rng);
  save_episodes(opt.out, specs);
  log << "wrote " << specs.size() << " episodes to " << opt.out.string() << "\n";
  return specs;
}

PolicyFactory make_policy_factory(const std::string& spec, const OccupancyGrid& grid,
                                  const RunOptions& opt, const fs::path& image_root) {
  const double radius = opt.success_radius;
  if (spec == "oracle") {
    return [&grid, radius] { return std::make_unique<OraclePolicy>(grid, radius); };
  }
  if (spec == "random") {
    const std::uint64_t seed = opt.seed;
    return [seed, radius] { return std::make_unique<RandomPolicy>(seed, radius); };
  }
  if (spec == "greedy") {
    return [] { return std::make_unique<GreedyPolicy>(); };
  }

  SessionOptions session;
  session.timeout = std::chrono::milliseconds(
      static_cast<std::int64_t>(std::llround(opt.policy_timeout * 1000.0)));
  session.inline_images = opt.inline_images;
  session.image_root = image_root;
  session.image_width = opt.image_size;
  session.image_height = opt.image_size;

  if (spec.rfind("cmd:", 0) == 0) {
    const auto argv = split_command(spec.substr(4));
    if (argv.empty()) throw Error(ErrorCode::kInvalidArgument, "empty policy command");
    return [argv, session] {
      return std::make_unique<RemotePolicy>(std::make_unique<PolicySession>(
          std::make_unique<SubprocessTransport>(argv), session));
    };
  }
  if (spec.rfind("tcp:", 0) == 0) {
    std::string addr = spec.substr(4);
    std::string host = "127.0.0.1";
    if (const auto colon = addr.rfind(':'); colon != std::string::npos) {
      host = addr.substr(0, colon);
      addr = addr.substr(colon + 1);
    }
    int port = -1;
    try {
      std::size_t used = 0;
      port = std::stoi(addr, &used);
      if (used != addr.size()) port = -1;
    } catch (const std::exception&) {
    }
    if (port < 0 || port > 65535) {
      throw Error(ErrorCode::kInvalidArgument, "bad policy address '" + spec + "'");
    }
    auto listener = std::make_shared<TcpListener>(static_cast<std::uint16_t>(port), host);
    return [listener, session] {
      return std::make_unique<RemotePolicy>(
          std::make_unique<PolicySession>(listener->accept(session.timeout), session));
    };
  }
  throw Error(ErrorCode::kInvalidArgument,
              "unknown policy '" + spec +
                  "' (expected oracle|random|greedy|cmd:<argv>|tcp:[HOST:]PORT)");
}

RunSummary cmd_run(const RunOptions& opt, std::ostream& log) {
  require(opt.map, "--map");
  require(opt.episodes, "--episodes");
  require(opt.out, "--out");
  if (opt.jobs < 1) throw Error(ErrorCode::kInvalidArgument, "--jobs must be >= 1");
  if (!(opt.policy_timeout > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "--policy-timeout must be > 0");
  }

  SimConfig cfg;
  cfg.max_steps = opt.max_steps;
  cfg.success_radius = opt.success_radius;
  cfg.mode = opt.mode;
  cfg.noise = noise_preset(opt.noise_sensor, opt.noise_actuator);
  if (opt.sensor_pos_sigma) cfg.noise.sensor_pos_sigma = *opt.sensor_pos_sigma;
  if (opt.sensor_ang_sigma) cfg.noise.sensor_ang_sigma = *opt.sensor_ang_sigma;
  if (opt.act_trans_sigma) cfg.noise.act_trans_sigma = *opt.act_trans_sigma;
  if (opt.act_rot_sigma) cfg.noise.act_rot_sigma = *opt.act_rot_sigma;
  cfg.seed = opt.seed;
  cfg.validate();

  const OccupancyGrid grid = load_grid(opt.map);
  const auto specs = load_episodes(opt.episodes);
  if (specs.empty()) throw Error(ErrorCode::kNoEpisodes, "episode file is empty");

  std::vector<ObservationRecord> records;
  std::unique_ptr<RetrievalIndex> index;
  if (opt.mode != ObservationMode::kVirtual) {
    require(opt.db, "--db");
    records = load_database(opt.db);
    RetrievalConfig rc;
    rc.cos_threshold = opt.cos_threshold;
    index = std::make_unique<RetrievalIndex>(records, rc);
  }
  const World world{&grid, index.get()};
  const fs::path image_root = opt.db.empty() ? fs::path() : opt.db.parent_path();
  const PolicyFactory factory = make_policy_factory(opt.policy, grid, opt, image_root);

  const auto trajectories = run_suite(factory, specs, world, cfg, opt.jobs);
  save_trajectory_log(opt.out, trajectories);

  RunSummary summary;
  summary.episodes = trajectories.size();
  for (const auto& t : trajectories) {
    if (t.outcome == Outcome::kSuccess) ++summary.successes;
    if (t.outcome == Outcome::kAborted) summary.aborted.push_back(t.spec.id);
    for (const auto& s : t.steps) summary.fallback_retrievals += s.retrieval_fallback ? 1 : 0;
  }
  log << "ran " << summary.episodes << " episodes (" << summary.successes
      << " successful) -> " << opt.out.string() << "\n";
  if (summary.fallback_retrievals > 0) {
    log << summary.fallback_retrievals
        << " observations used the heading fallback (no image within the cosine threshold)\n";
  }
  if (!summary.aborted.empty()) {
    log << summary.aborted.size() << " aborted episodes: " << join_ids(summary.aborted) << "\n";
    for (const auto& t : trajectories) {
      if (t.outcome == Outcome::kAborted) {
        log << "  episode " << t.spec.id << ": " << t.error << "\n";
      }
    }
  }
  return summary;
}

EvalSummary cmd_eval(const EvalOptions& opt, std::ostream& out) {
  require(opt.log, "--log");
  const auto summaries = load_trajectory_log(opt.log);
  EvalSummary result;
  std::vector<EpisodeResult> results;
  for (const auto& s : summaries) {
    if (s.outcome == Outcome::kAborted) {
      result.aborted.push_back(s.id);
      continue;
    }
    results.push_back({s.outcome == Outcome::kSuccess, s.geodesic, s.path_length,
                       s.final_distance});
  }
  if (results.empty()) {
    throw Error(ErrorCode::kNoEpisodes, "no evaluable episodes in " + opt.log.string());
  }
  result.report = evaluate(results, opt.edges);
  out << report_table(result.report);
  if (!result.aborted.empty()) {
    out << result.aborted.size()
        << " aborted episodes excluded: " << join_ids(result.aborted) << "\n";
  }
  if (!opt.out.empty()) detail::write_file_atomically(opt.out, report_json(result.report));
  if (!opt.histogram.empty()) {
    detail::write_file_atomically(opt.histogram, histogram_csv(result.report));
  }
  return result;
}

void cmd_make_fixture(const FixtureOptions& opt, std::ostream& log) {
  require(opt.dir, "--dir");
  fs::create_directories(opt.dir);

  const OccupancyGrid demo = make_demo_grid();
  const OccupancyGrid office = make_office_grid();
  SyntheticDbOptions db_opt;
  db_opt.count = opt.db_count;
  db_opt.seed = opt.seed;
  const auto demo_db = make_synthetic_database(demo, db_opt);
  db_opt.count = opt.db_count * 6;
  const auto office_db = make_synthetic_database(office, db_opt);

  save_grid(opt.dir / "demo_map.txt", demo);
  save_grid(opt.dir / "office_map.txt", office);
  save_database(opt.dir / "demo_db.jsonl", demo_db);
  save_database(opt.dir / "office_db.jsonl", office_db);

  // Reconstruction frame of the demo database: map = 1.7 * R_y(35 deg) * p + t.
  SimilarityTransform map_from_sfm;
  map_from_sfm.scale = 1.7;
  map_from_sfm.rotation = yaw_rotation(35.0 * std::numbers::pi / 180.0);
  map_from_sfm.translation = Vec3(2.0, -0.4, -1.5);
  const SfmExport sfm = export_sfm_fixture(demo_db, map_from_sfm, 24, 0.0, opt.seed);
  detail::write_file_atomically(opt.dir / "demo_images.txt", sfm.images_txt);
  detail::write_file_atomically(opt.dir / "demo_correspondences.txt",
                                format_correspondences(sfm.correspondences));

  log << "wrote demo_map.txt, office_map.txt, demo_db.jsonl (" << demo_db.size()
      << "), office_db.jsonl (" << office_db.size()
      << "), demo_images.txt, demo_correspondences.txt to " << opt.dir.string() << "\n";
}

}  // namespace realnav

#include <iostream>
#include <map>
#include <numbers>

#include <CLI11.hpp>

#include "realnav/commands.hpp"
#include "realnav/error.hpp"

using namespace realnav;

namespace {

const std::map<std::string, NoiseLevel> kNoiseLevels{{"none", NoiseLevel::kNone},
                                                     {"small", NoiseLevel::kSmall},
                                                     {"medium", NoiseLevel::kMedium},
                                                     {"large", NoiseLevel::kLarge}};

const std::map<std::string, ObservationMode> kModes{{"virtual", ObservationMode::kVirtual},
                                                    {"real", ObservationMode::kReal},
                                                    {"hybrid", ObservationMode::kHybrid}};

/// Applies a TOML-style file (`key = value`, keys named like the long flags,
/// optionally under a `[<subcommand>]` section) to options not given on the
/// command line.
void apply_config(CLI::App& cmd, const std::string& path) {
  for (const CLI::ConfigItem& item : CLI::ConfigTOML().from_file(path)) {
    if (item.name == "++" || item.name == "--") continue;  // section markers
    if (!item.parents.empty() &&
        !(item.parents.size() == 1 && item.parents[0] == cmd.get_name())) {
      continue;
    }
    CLI::Option* opt = cmd.get_option_no_throw("--" + item.name);
    if (opt == nullptr || item.name == "config") {
      throw CLI::ValidationError(path, "unknown config key '" + item.name + "'");
    }
    if (opt->count() > 0) continue;  // flags win over the file
    opt->add_result(item.inputs);
    opt->run_callback();
  }
}

double degrees(double d) { return d * std::numbers::pi / 180.0; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"PointGoal navigation with real-image observations"};
  app.require_subcommand(1);

  AlignOptions align;
  auto* align_cmd = app.add_subcommand("align", "register an SfM reconstruction to the map frame");
  align_cmd->add_option("--correspondences", align.correspondences,
                        "reference pairs, `sx sy sz tx ty tz` per line")
      ->required();
  align_cmd->add_option("--images", align.images, "SfM images.txt")->required();
  align_cmd->add_option("--out", align.out, "output database (JSON lines)")->required();

  GenEpisodesOptions gen;
  auto* gen_cmd = app.add_subcommand("gen-episodes", "sample start/goal episodes");
  std::string gen_config;
  gen_cmd->add_option("--config", gen_config, "TOML-style defaults for these flags")
      ->check(CLI::ExistingFile);
  gen_cmd->add_option("--map", gen.map, "occupancy grid");
  gen_cmd->add_option("-n,--count", gen.n, "number of episodes")->capture_default_str();
  gen_cmd->add_option("--min-ratio", gen.min_ratio, "geodesic/euclidean lower bound")
      ->capture_default_str();
  gen_cmd->add_option("--seed", gen.seed)->capture_default_str();
  gen_cmd->add_option("--out", gen.out, "episode file (JSON lines)");

  RunOptions run;
  std::optional<int> image_size;
  auto* run_cmd = app.add_subcommand("run", "run a policy over an episode set");
  std::string run_config;
  run_cmd->add_option("--config", run_config, "TOML-style defaults for these flags")
      ->check(CLI::ExistingFile);
  run_cmd->add_option("--map", run.map, "occupancy grid");
  run_cmd->add_option("--db", run.db, "observation database (JSON lines)");
  run_cmd->add_option("--episodes", run.episodes, "episode file");
  run_cmd->add_option("--policy", run.policy,
                      "oracle | random | greedy | cmd:<argv> | tcp:[HOST:]PORT")
      ->capture_default_str();
  run_cmd->add_option("--noise-sensor", run.noise_sensor, "none|small|medium|large")
      ->transform(CLI::CheckedTransformer(kNoiseLevels, CLI::ignore_case));
  run_cmd->add_option("--noise-actuator", run.noise_actuator, "none|small|medium|large")
      ->transform(CLI::CheckedTransformer(kNoiseLevels, CLI::ignore_case));
  std::optional<double> pos_sigma, ang_sigma, trans_sigma, rot_sigma;
  run_cmd->add_option("--sensor-pos-sigma", pos_sigma, "override: localization sigma (m)");
  run_cmd->add_option("--sensor-ang-sigma", ang_sigma, "override: heading sigma (deg)");
  run_cmd->add_option("--act-trans-sigma", trans_sigma, "override: move sigma (m)");
  run_cmd->add_option("--act-rot-sigma", rot_sigma, "override: rotation sigma (deg)");
  run_cmd->add_option("--cos-threshold", run.cos_threshold)->capture_default_str();
  run_cmd->add_option("--max-steps", run.max_steps)->capture_default_str();
  run_cmd->add_option("--success-radius", run.success_radius)->capture_default_str();
  run_cmd->add_option("--seed", run.seed)->capture_default_str();
  run_cmd->add_option("--jobs", run.jobs)->capture_default_str();
  run_cmd->add_option("--mode", run.mode, "virtual|real|hybrid")
      ->transform(CLI::CheckedTransformer(kModes, CLI::ignore_case));
  run_cmd->add_option("--policy-timeout", run.policy_timeout, "seconds per message")
      ->capture_default_str();
  run_cmd->add_flag("--inline-images", run.inline_images, "send image bytes base64-encoded");
  run_cmd->add_option("--image-size", image_size, "announce square image size in hello");
  run_cmd->add_option("--out", run.out, "trajectory log (JSON lines)");

  EvalOptions eval;
  auto* eval_cmd = app.add_subcommand("eval", "compute SPL, success rate and failure histogram");
  eval_cmd->add_option("log", eval.log, "trajectory log")->required();
  eval_cmd->add_option("--out", eval.out, "JSON report");
  eval_cmd->add_option("--histogram", eval.histogram, "histogram CSV");
  eval_cmd->add_option("--edges", eval.edges, "histogram bin edges (meters)");

  FixtureOptions fixture;
  auto* fixture_cmd = app.add_subcommand("make-fixture", "write the synthetic demo fixture");
  fixture_cmd->add_option("--dir", fixture.dir, "output directory")->required();
  fixture_cmd->add_option("--db-count", fixture.db_count)->capture_default_str();
  fixture_cmd->add_option("--seed", fixture.seed)->capture_default_str();

  try {
    app.parse(argc, argv);
    if (*gen_cmd && !gen_config.empty()) apply_config(*gen_cmd, gen_config);
    if (*run_cmd && !run_config.empty()) apply_config(*run_cmd, run_config);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*align_cmd) {
      cmd_align(align, std::cout);
    } else if (*gen_cmd) {
      cmd_gen_episodes(gen, std::cout);
    } else if (*run_cmd) {
      run.image_size = image_size;
      if (pos_sigma) run.sensor_pos_sigma = *pos_sigma;
      if (ang_sigma) run.sensor_ang_sigma = degrees(*ang_sigma);
      if (trans_sigma) run.act_trans_sigma = *trans_sigma;
      if (rot_sigma) run.act_rot_sigma = degrees(*rot_sigma);
      const RunSummary s = cmd_run(run, std::cout);
      if (!s.aborted.empty()) return 3;
    } else if (*eval_cmd) {
      const EvalSummary s = cmd_eval(eval, std::cout);
      if (!s.aborted.empty()) return 3;
    } else if (*fixture_cmd) {
      cmd_make_fixture(fixture, std::cout);
    }
  } catch (const Error& e) {
    std::cerr << "error [" << error_code_name(e.code()) << "]: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

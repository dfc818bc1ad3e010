#include "realnav/sim_io.hpp"

#include <fstream>

#include <json.hpp>

#include "realnav/error.hpp"
#include "text_util.hpp"

namespace realnav {

using ojson = nlohmann::ordered_json;

std::string format_episodes(std::span<const EpisodeSpec> specs) {
  std::string out;
  for (const auto& s : specs) {
    ojson j;
    j["id"] = s.id;
    j["start_x"] = s.start.x;
    j["start_z"] = s.start.z;
    j["start_theta"] = s.start.heading.angle();
    j["goal_x"] = s.goal.x;
    j["goal_z"] = s.goal.z;
    j["geodesic"] = s.geodesic;
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::vector<EpisodeSpec> parse_episodes(std::istream& in) {
  std::vector<EpisodeSpec> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::is_blank(line)) continue;
    try {
      const ojson j = ojson::parse(line);
      EpisodeSpec s;
      s.id = j.at("id").get<std::int64_t>();
      s.start.x = j.at("start_x").get<double>();
      s.start.z = j.at("start_z").get<double>();
      s.start.heading = Heading::from_angle(j.at("start_theta").get<double>());
      s.goal.x = j.at("goal_x").get<double>();
      s.goal.z = j.at("goal_z").get<double>();
      s.geodesic = j.at("geodesic").get<double>();
      out.push_back(s);
    } catch (const ojson::exception& e) {
      throw ParseError(line_no, e.what());
    } catch (const Error& e) {
      throw ParseError(line_no, e.what());
    }
  }
  return out;
}

std::vector<EpisodeSpec> load_episodes(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open episodes " + path.string());
  return parse_episodes(in);
}

void save_episodes(const std::filesystem::path& path,
                   std::span<const EpisodeSpec> specs) {
  detail::write_file_atomically(path, format_episodes(specs));
}

EpisodeSummary summarize(const Trajectory& t) {
  EpisodeSummary s;
  s.id = t.spec.id;
  s.outcome = t.outcome;
  s.steps = static_cast<int>(t.steps.size());
  s.final_distance = t.final_distance;
  s.path_length = t.path_length;
  s.geodesic = t.spec.geodesic;
  s.error = t.error;
  return s;
}

std::string format_trajectory_log(std::span<const Trajectory> trajectories) {
  std::string out;
  for (const auto& t : trajectories) {
    for (const auto& st : t.steps) {
      ojson j;
      j["type"] = "step";
      j["episode_id"] = t.spec.id;
      j["step"] = st.index;
      j["action"] = action_name(st.action);
      j["x"] = st.true_pose.x;
      j["z"] = st.true_pose.z;
      j["theta"] = st.true_pose.heading.angle();
      j["perceived_x"] = st.perceived_pose.x;
      j["perceived_z"] = st.perceived_pose.z;
      j["perceived_theta"] = st.perceived_pose.heading.angle();
      j["record_id"] = st.record_id ? ojson(*st.record_id) : ojson(nullptr);
      if (st.retrieval_fallback) j["fallback"] = true;
      out += j.dump();
      out += '\n';
    }
    const EpisodeSummary s = summarize(t);
    ojson j;
    j["type"] = "summary";
    j["episode_id"] = s.id;
    j["outcome"] = outcome_name(s.outcome);
    j["steps"] = s.steps;
    j["final_distance"] = s.final_distance;
    j["path_length"] = s.path_length;
    j["geodesic"] = s.geodesic;
    if (!s.error.empty()) j["error"] = s.error;
    out += j.dump();
    out += '\n';
  }
  return out;
}

void save_trajectory_log(const std::filesystem::path& path,
                         std::span<const Trajectory> trajectories) {
  detail::write_file_atomically(path, format_trajectory_log(trajectories));
}

std::vector<EpisodeSummary> parse_trajectory_log(std::istream& in) {
  std::vector<EpisodeSummary> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::is_blank(line)) continue;
    try {
      const ojson j = ojson::parse(line);
      const std::string type = j.at("type").get<std::string>();
      if (type == "step") continue;
      if (type != "summary") throw ParseError(line_no, "unknown record type '" + type + "'");
      EpisodeSummary s;
      s.id = j.at("episode_id").get<std::int64_t>();
      const std::string outcome = j.at("outcome").get<std::string>();
      if (outcome == "success") {
        s.outcome = Outcome::kSuccess;
      } else if (outcome == "failure") {
        s.outcome = Outcome::kFailure;
      } else if (outcome == "aborted") {
        s.outcome = Outcome::kAborted;
      } else {
        throw ParseError(line_no, "unknown outcome '" + outcome + "'");
      }
      s.steps = j.at("steps").get<int>();
      s.final_distance = j.at("final_distance").get<double>();
      s.path_length = j.at("path_length").get<double>();
      s.geodesic = j.at("geodesic").get<double>();
      if (j.contains("error")) s.error = j.at("error").get<std::string>();
      out.push_back(std::move(s));
    } catch (const ojson::exception& e) {
      throw ParseError(line_no, e.what());
    }
  }
  return out;
}

std::vector<EpisodeSummary> load_trajectory_log(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open log " + path.string());
  return parse_trajectory_log(in);
}

}  // namespace realnav

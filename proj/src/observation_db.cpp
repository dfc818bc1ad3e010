#include "realnav/observation_db.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <Eigen/Geometry>
#include <json.hpp>

#include "realnav/error.hpp"
#include "text_util.hpp"

namespace realnav {

using nlohmann::json;

std::vector<SfmImage> parse_sfm_poses(std::istream& in) {
  struct Line {
    std::size_t number;
    std::string text;
  };
  std::vector<Line> data;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    // Only whole-line comments: image names may legitimately contain '#'.
    if (!line.empty() && line.front() == '#') continue;
    data.push_back({line_no, line});
  }
  // A trailing blank line after the last points line is not a data line.
  if (data.size() % 2 == 1 && detail::is_blank(data.back().text)) data.pop_back();
  if (data.size() % 2 == 1) {
    throw ParseError(data.back().number,
                     "image line without a following 2D points line");
  }

  std::vector<SfmImage> images;
  images.reserve(data.size() / 2);
  for (std::size_t i = 0; i < data.size(); i += 2) {
    const Line& l = data[i];
    std::istringstream fields(l.text);
    std::int64_t id = 0;
    double qw, qx, qy, qz, tx, ty, tz;
    std::int64_t camera_id = 0;
    if (!(fields >> id >> qw >> qx >> qy >> qz >> tx >> ty >> tz >> camera_id)) {
      throw ParseError(l.number,
                       "expected `IMAGE_ID QW QX QY QZ TX TY TZ CAMERA_ID NAME`");
    }
    std::string name;
    std::getline(fields >> std::ws, name);
    name = std::string(detail::trim(name));
    if (name.empty()) throw ParseError(l.number, "missing image NAME");

    const double norm = std::sqrt(qw * qw + qx * qx + qy * qy + qz * qz);
    if (!std::isfinite(norm) || std::abs(norm - 1.0) > 1e-3) {
      throw Error(ErrorCode::kValidation,
                  "line " + std::to_string(l.number) +
                      ": quaternion is not unit length (|q| = " +
                      std::to_string(norm) + ")");
    }
    const Eigen::Quaterniond q(qw / norm, qx / norm, qy / norm, qz / norm);
    const Mat3 r_cw = q.toRotationMatrix();
    const Vec3 t(tx, ty, tz);

    SfmImage img;
    img.id = id;
    img.name = std::move(name);
    img.pose.rotation = r_cw.transpose();
    img.pose.position = -(r_cw.transpose() * t);
    images.push_back(std::move(img));
  }
  return images;
}

std::vector<ObservationRecord> parse_sfm_images(std::istream& in) {
  std::vector<ObservationRecord> out;
  for (auto& img : parse_sfm_poses(in)) {
    out.push_back({img.id, std::move(img.name), pose6_to_pose3(img.pose)});
  }
  return out;
}

std::vector<ObservationRecord> load_sfm_images(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  return parse_sfm_images(in);
}

std::vector<ObservationRecord> parse_database(std::istream& in) {
  std::vector<ObservationRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::is_blank(line)) continue;
    try {
      const json j = json::parse(line);
      ObservationRecord r;
      r.id = j.at("id").get<std::int64_t>();
      r.image_ref = j.at("image").get<std::string>();
      r.pose.x = j.at("x").get<double>();
      r.pose.z = j.at("z").get<double>();
      r.pose.heading = Heading::from_angle(j.at("theta_rad").get<double>());
      out.push_back(std::move(r));
    } catch (const json::exception& e) {
      throw ParseError(line_no, e.what());
    } catch (const Error& e) {
      throw ParseError(line_no, e.what());
    }
  }
  return out;
}

std::vector<ObservationRecord> load_database(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open database " + path.string());
  return parse_database(in);
}

std::string format_database(std::span<const ObservationRecord> records) {
  std::string out;
  for (const auto& r : records) {
    json j;
    j["id"] = r.id;
    j["image"] = r.image_ref;
    j["x"] = r.pose.x;
    j["z"] = r.pose.z;
    j["theta_rad"] = r.pose.heading.angle();
    out += j.dump();
    out += '\n';
  }
  return out;
}

void save_database(const std::filesystem::path& path,
                   std::span<const ObservationRecord> records) {
  detail::write_file_atomically(path, format_database(records));
}

}  // namespace realnav

#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "realnav/geometry.hpp"
#include "realnav/observation.hpp"

namespace realnav {

/// One registered image of an SfM `images.txt`, with its world-from-camera pose.
struct SfmImage {
  std::int64_t id = 0;
  std::string name;
  Pose6 pose;
};

/// Parses COLMAP `images.txt`: per image one `IMAGE_ID QW QX QY QZ TX TY TZ
/// CAMERA_ID NAME` line followed by one (ignored) 2D-points line. The stored
/// camera-from-world pose is inverted (R_wc = R^T, C = -R^T t).
/// Throws ParseError with the line number for malformed lines or a missing
/// points line; kValidation when |q| deviates from 1 by more than 1e-3.
std::vector<SfmImage> parse_sfm_poses(std::istream& in);

/// Planar records (via pose6_to_pose3) from `images.txt`.
std::vector<ObservationRecord> parse_sfm_images(std::istream& in);
std::vector<ObservationRecord> load_sfm_images(const std::filesystem::path& path);

/// Native database: JSON lines `{"id","image","x","z","theta_rad"}`.
std::vector<ObservationRecord> parse_database(std::istream& in);
std::vector<ObservationRecord> load_database(const std::filesystem::path& path);
std::string format_database(std::span<const ObservationRecord> records);
void save_database(const std::filesystem::path& path,
                   std::span<const ObservationRecord> records);

}  // namespace realnav

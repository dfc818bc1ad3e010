#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "realnav/geometry.hpp"
#include "realnav/observation.hpp"

namespace realnav {

/// One reference pairing: a point in the real (SfM) model frame and the same
/// point in the virtual model frame.
struct Correspondence {
  Vec3 source = Vec3::Zero();
  Vec3 target = Vec3::Zero();
};

struct AlignmentReport {
  SimilarityTransform transform;
  double rmse = 0.0;
  std::size_t n_points = 0;
};

/// Closed-form least-squares similarity (scale, rotation, translation)
/// minimizing sum |target_i - T(source_i)|^2.
///
/// Throws kDegenerateConfiguration for fewer than three correspondences,
/// coincident or collinear sources, or targets collapsing to a point.
AlignmentReport estimate_similarity(std::span<const Correspondence> pairs);

/// Root-mean-square residual of `t` over the correspondences.
double alignment_rmse(const SimilarityTransform& t,
                      std::span<const Correspondence> pairs);

/// Re-expresses planar records in the target frame: positions go through the
/// full transform (at zero altitude), headings turn by the transform's yaw.
std::vector<ObservationRecord> align_database(
    std::span<const ObservationRecord> records,
    const SimilarityTransform& transform);

/// Transforms a camera pose: R' = R_t * R, C' = T(C).
Pose6 align_pose(const Pose6& pose, const SimilarityTransform& transform);

/// Correspondence file: one `sx sy sz tx ty tz` line per pair, `#` comments.
std::vector<Correspondence> load_correspondences(
    const std::filesystem::path& path);
std::vector<Correspondence> parse_correspondences(std::istream& in);

}  // namespace realnav

#include "realnav/alignment.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <Eigen/LU>
#include <Eigen/SVD>

#include "realnav/error.hpp"
#include "text_util.hpp"

namespace realnav {

AlignmentReport estimate_similarity(std::span<const Correspondence> pairs) {
  const std::size_t n = pairs.size();
  if (n < 3) {
    throw Error(ErrorCode::kDegenerateConfiguration,
                "similarity estimation needs at least 3 correspondences, got " +
                    std::to_string(n));
  }
  for (const auto& c : pairs) {
    if (!c.source.allFinite() || !c.target.allFinite()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "correspondence coordinates must be finite");
    }
  }

  Vec3 mean_src = Vec3::Zero();
  Vec3 mean_dst = Vec3::Zero();
  for (const auto& c : pairs) {
    mean_src += c.source;
    mean_dst += c.target;
  }
  mean_src /= static_cast<double>(n);
  mean_dst /= static_cast<double>(n);

  Mat3 cov = Mat3::Zero();
  Mat3 src_scatter = Mat3::Zero();
  double var_src = 0.0;
  double var_dst = 0.0;
  for (const auto& c : pairs) {
    const Vec3 s = c.source - mean_src;
    const Vec3 d = c.target - mean_dst;
    cov += d * s.transpose();
    src_scatter += s * s.transpose();
    var_src += s.squaredNorm();
    var_dst += d.squaredNorm();
  }
  cov /= static_cast<double>(n);
  var_src /= static_cast<double>(n);
  var_dst /= static_cast<double>(n);

  // Rotation is determined only when the sources span at least a plane.
  const Eigen::JacobiSVD<Mat3> scatter_svd(src_scatter);
  const Vec3 spread = scatter_svd.singularValues();
  if (!(spread(0) > 0.0) || spread(1) <= 1e-12 * spread(0)) {
    throw Error(ErrorCode::kDegenerateConfiguration,
                "source points are coincident or collinear");
  }
  if (var_dst <= 1e-24 * var_src) {
    throw Error(ErrorCode::kDegenerateConfiguration,
                "target points collapse to a single point");
  }

  const Eigen::JacobiSVD<Mat3> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Mat3& u = svd.matrixU();
  const Mat3& v = svd.matrixV();
  Vec3 signs = Vec3::Ones();
  if (u.determinant() * v.determinant() < 0.0) signs(2) = -1.0;

  AlignmentReport report;
  report.n_points = n;
  report.transform.rotation = u * signs.asDiagonal() * v.transpose();
  report.transform.scale = svd.singularValues().dot(signs) / var_src;
  report.transform.translation =
      mean_dst - report.transform.scale * (report.transform.rotation * mean_src);
  if (!(report.transform.scale > 0.0)) {
    throw Error(ErrorCode::kDegenerateConfiguration,
                "estimated scale is not positive");
  }
  report.rmse = alignment_rmse(report.transform, pairs);
  return report;
}

double alignment_rmse(const SimilarityTransform& t,
                      std::span<const Correspondence> pairs) {
  if (pairs.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& c : pairs) {
    sum += (c.target - apply_similarity(t, c.source)).squaredNorm();
  }
  return std::sqrt(sum / static_cast<double>(pairs.size()));
}

std::vector<ObservationRecord> align_database(
    std::span<const ObservationRecord> records,
    const SimilarityTransform& transform) {
  transform.validate();
  const double yaw = transform.yaw();
  std::vector<ObservationRecord> out;
  out.reserve(records.size());
  for (const auto& r : records) {
    const Vec3 p = apply_similarity(transform, Vec3(r.pose.x, 0.0, r.pose.z));
    ObservationRecord aligned = r;
    aligned.pose.x = p.x();
    aligned.pose.z = p.z();
    aligned.pose.heading = r.pose.heading.rotated(yaw);
    out.push_back(std::move(aligned));
  }
  return out;
}

Pose6 align_pose(const Pose6& pose, const SimilarityTransform& transform) {
  return Pose6{transform.rotation * pose.rotation,
               apply_similarity(transform, pose.position)};
}

std::vector<Correspondence> parse_correspondences(std::istream& in) {
  std::vector<Correspondence> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view body = detail::strip_comment(line);
    if (detail::is_blank(body)) continue;
    std::istringstream fields{std::string(body)};
    Correspondence c;
    double vals[6];
    for (double& v : vals) {
      if (!(fields >> v)) {
        throw ParseError(line_no, "expected six numbers `sx sy sz tx ty tz`");
      }
    }
    std::string extra;
    if (fields >> extra) {
      throw ParseError(line_no, "unexpected token '" + extra + "'");
    }
    c.source = Vec3(vals[0], vals[1], vals[2]);
    c.target = Vec3(vals[3], vals[4], vals[5]);
    out.push_back(c);
  }
  return out;
}

std::vector<Correspondence> load_correspondences(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::kIo, "cannot open correspondence file " + path.string());
  }
  return parse_correspondences(in);
}

}  // namespace realnav

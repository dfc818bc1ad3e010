#include "realnav/geometry.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/LU>

#include "realnav/error.hpp"

namespace realnav {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid-argument";
    case ErrorCode::kDegeneratePose: return "degenerate-pose";
    case ErrorCode::kDegenerateConfiguration: return "degenerate-configuration";
    case ErrorCode::kParse: return "parse-error";
    case ErrorCode::kValidation: return "validation-error";
    case ErrorCode::kEmptyDatabase: return "empty-database";
    case ErrorCode::kEmptyMap: return "empty-map";
    case ErrorCode::kInvalidEndpoint: return "invalid-endpoint";
    case ErrorCode::kInfeasibleMap: return "infeasible-map";
    case ErrorCode::kInvalidResult: return "invalid-result";
    case ErrorCode::kProtocol: return "protocol-error";
    case ErrorCode::kTimeout: return "timeout";
    case ErrorCode::kIo: return "io-error";
    case ErrorCode::kNoEpisodes: return "no-episodes";
  }
  return "unknown";
}

double distance(const Point2& a, const Point2& b) {
  return std::hypot(a.x - b.x, a.z - b.z);
}

Heading Heading::from_angle(double theta) {
  if (!std::isfinite(theta)) {
    throw Error(ErrorCode::kInvalidArgument, "heading angle must be finite");
  }
  return Heading(std::cos(theta), std::sin(theta));
}

Heading Heading::from_vector(double u, double v) {
  const double n = std::hypot(u, v);
  if (!std::isfinite(n) || n == 0.0) {
    throw Error(ErrorCode::kInvalidArgument,
                "heading vector must be finite and non-zero");
  }
  if (n == 1.0) return Heading(u, v);
  return Heading(u / n, v / n);
}

Heading Heading::facing(double dx, double dz) { return from_vector(-dz, -dx); }

double Heading::angle() const { return std::atan2(v_, u_); }

Heading Heading::rotated(double delta) const {
  if (delta == 0.0) return *this;
  const double c = std::cos(delta);
  const double s = std::sin(delta);
  return from_vector(u_ * c - v_ * s, u_ * s + v_ * c);
}

double wrap_angle(double theta) {
  double w = std::remainder(theta, 2.0 * std::numbers::pi);
  if (w <= -std::numbers::pi) w += 2.0 * std::numbers::pi;
  return w;
}

bool is_rotation(const Mat3& r, double tol) {
  if (!r.allFinite()) return false;
  if (((r.transpose() * r) - Mat3::Identity()).cwiseAbs().maxCoeff() > tol) {
    return false;
  }
  return std::abs(r.determinant() - 1.0) <= tol;
}

double yaw_of_direction(const Vec3& direction) {
  return std::atan2(-direction.x(), -direction.z());
}

Pose3 pose6_to_pose3(const Pose6& pose) {
  if (!is_rotation(pose.rotation)) {
    throw Error(ErrorCode::kInvalidArgument,
                "camera rotation is not orthonormal with determinant +1");
  }
  if (!pose.position.allFinite()) {
    throw Error(ErrorCode::kInvalidArgument, "camera position must be finite");
  }
  // Camera forward is its -Z axis expressed in the world frame.
  const Vec3 forward = -pose.rotation.col(2);
  if (std::hypot(forward.x(), forward.z()) < 1e-6) {
    throw Error(ErrorCode::kDegeneratePose,
                "camera forward axis is vertical; yaw is undefined");
  }
  return Pose3{pose.position.x(), pose.position.z(),
               Heading::facing(forward.x(), forward.z())};
}

Mat3 yaw_rotation(double theta) {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  Mat3 r;
  r << c, 0.0, s,
       0.0, 1.0, 0.0,
       -s, 0.0, c;
  return r;
}

void SimilarityTransform::validate() const {
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw Error(ErrorCode::kInvalidArgument,
                "similarity scale must be positive and finite");
  }
  if (!is_rotation(rotation)) {
    throw Error(ErrorCode::kInvalidArgument,
                "similarity rotation is not a proper rotation");
  }
  if (!translation.allFinite()) {
    throw Error(ErrorCode::kInvalidArgument,
                "similarity translation must be finite");
  }
}

SimilarityTransform SimilarityTransform::inverse() const {
  SimilarityTransform inv;
  inv.scale = 1.0 / scale;
  inv.rotation = rotation.transpose();
  inv.translation = -(inv.scale * (inv.rotation * translation));
  return inv;
}

SimilarityTransform SimilarityTransform::compose(
    const SimilarityTransform& other) const {
  SimilarityTransform out;
  out.scale = scale * other.scale;
  out.rotation = rotation * other.rotation;
  out.translation = scale * (rotation * other.translation) + translation;
  return out;
}

double SimilarityTransform::yaw() const {
  return yaw_of_direction(rotation * Vec3(0.0, 0.0, -1.0));
}

GoalVector goal_vector(const Pose3& pose, const Point2& target) {
  const double dx = target.x - pose.x;
  const double dz = target.z - pose.z;
  GoalVector g;
  g.distance = std::hypot(dx, dz);
  if (g.distance == 0.0) return g;
  const Heading to_goal = Heading::facing(dx, dz);
  const Heading& h = pose.heading;
  const double s = to_goal.v() * h.u() - to_goal.u() * h.v();
  const double c = to_goal.u() * h.u() + to_goal.v() * h.v();
  g.bearing = std::atan2(s, c);
  if (g.bearing <= -std::numbers::pi) g.bearing = std::numbers::pi;
  return g;
}

}  // namespace realnav

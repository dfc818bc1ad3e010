#pragma once

// Planar pose algebra shared by every module.
//
// Frame convention: Y is up and the ground plane is XZ. A camera looks along
// the -Z axis of its own frame. Yaw is the right-handed rotation about +Y
// (counter-clockwise seen from above) measured from world -Z, so the identity
// camera has yaw 0 and a heading of yaw theta moves the agent along
// (dx, dz) = (-sin theta, -cos theta).

#include <Eigen/Core>

namespace realnav {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

struct Point2 {
  double x = 0.0;
  double z = 0.0;

  friend bool operator==(const Point2&, const Point2&) = default;
};

double distance(const Point2& a, const Point2& b);

/// Unit heading vector (u, v) = (cos theta, sin theta).
class Heading {
 public:
  Heading() = default;

  /// Throws kInvalidArgument for a non-finite angle.
  static Heading from_angle(double theta);
  /// Normalizes (u, v); throws kInvalidArgument for a zero or non-finite vector.
  static Heading from_vector(double u, double v);
  /// Heading whose planar forward direction is (dx, dz).
  static Heading facing(double dx, double dz);

  double u() const noexcept { return u_; }
  double v() const noexcept { return v_; }
  double angle() const;

  Heading rotated(double delta) const;
  /// Planar forward direction (dx, dz) of this heading.
  Point2 forward() const noexcept { return {-v_, -u_}; }

  friend bool operator==(const Heading&, const Heading&) = default;

 private:
  Heading(double u, double v) : u_(u), v_(v) {}

  double u_ = 1.0;
  double v_ = 0.0;
};

inline Heading heading_from_angle(double theta) {
  return Heading::from_angle(theta);
}

/// Cosine similarity of two headings (their dot product).
inline double heading_cosine(const Heading& a, const Heading& b) noexcept {
  return a.u() * b.u() + a.v() * b.v();
}

/// Wraps an angle into (-pi, pi].
double wrap_angle(double theta);

struct Pose3 {
  double x = 0.0;
  double z = 0.0;
  Heading heading;

  Point2 position() const noexcept { return {x, z}; }

  friend bool operator==(const Pose3&, const Pose3&) = default;
};

/// Camera pose: world-from-camera rotation and camera center in world frame.
struct Pose6 {
  Mat3 rotation = Mat3::Identity();
  Vec3 position = Vec3::Zero();
};

/// Drops altitude, pitch and roll. Throws kDegeneratePose when the camera
/// forward axis is within 1e-6 of vertical, kInvalidArgument when the rotation
/// is not a proper rotation.
Pose3 pose6_to_pose3(const Pose6& pose);

/// Yaw angle of a world-frame direction projected on the ground plane.
double yaw_of_direction(const Vec3& direction);

struct SimilarityTransform {
  double scale = 1.0;
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  static SimilarityTransform identity() { return {}; }

  /// Throws kInvalidArgument unless scale > 0 and rotation is orthonormal
  /// with determinant +1 (tolerance 1e-6).
  void validate() const;

  SimilarityTransform inverse() const;
  /// (*this) after `other`: x -> this(other(x)).
  SimilarityTransform compose(const SimilarityTransform& other) const;
  /// Yaw of the rotation part, measured on the transformed -Z axis.
  double yaw() const;
};

inline Vec3 apply_similarity(const SimilarityTransform& t, const Vec3& p) {
  return t.scale * (t.rotation * p) + t.translation;
}

/// Rotation of `theta` radians about +Y.
Mat3 yaw_rotation(double theta);

bool is_rotation(const Mat3& r, double tol = 1e-6);

/// Planar goal vector (distance, bearing) of `target` seen from `pose`.
/// Bearing is positive when the target lies to the left; range (-pi, pi].
struct GoalVector {
  double distance = 0.0;
  double bearing = 0.0;
};

GoalVector goal_vector(const Pose3& pose, const Point2& target);

}  // namespace realnav

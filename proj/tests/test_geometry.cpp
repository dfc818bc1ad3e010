#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Geometry>

#include "realnav/error.hpp"
#include "realnav/geometry.hpp"

using namespace realnav;

namespace {
constexpr double kPi = std::numbers::pi;
double deg(double d) { return d * kPi / 180.0; }
}  // namespace

TEST(WrapAngle, RangeIsHalfOpen) {
  EXPECT_DOUBLE_EQ(wrap_angle(kPi), kPi);
  EXPECT_DOUBLE_EQ(wrap_angle(-kPi), kPi);
  EXPECT_NEAR(wrap_angle(3 * kPi), kPi, 1e-12);
  EXPECT_NEAR(wrap_angle(deg(370)), deg(10), 1e-12);
  EXPECT_NEAR(wrap_angle(deg(-190)), deg(170), 1e-12);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> any(-50.0, 50.0);
  for (int i = 0; i < 10000; ++i) {
    const double w = wrap_angle(any(rng));
    EXPECT_GT(w, -kPi);
    EXPECT_LE(w, kPi);
  }
}

TEST(Heading, AngleRoundTripAndUnitNorm) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> any(-kPi, kPi);
  for (int i = 0; i < 1000; ++i) {
    const double a = any(rng);
    const Heading h = Heading::from_angle(a);
    EXPECT_NEAR(std::hypot(h.u(), h.v()), 1.0, 1e-15);
    EXPECT_NEAR(std::remainder(h.angle() - a, 2 * kPi), 0.0, 1e-12);
  }
}

TEST(Heading, RepeatedRotationStaysUnit) {
  Heading h;
  for (int i = 0; i < 100000; ++i) h = h.rotated(deg(10.0) + 1e-3);
  EXPECT_NEAR(std::hypot(h.u(), h.v()), 1.0, 1e-12);
}

TEST(Heading, RejectsDegenerateInput) {
  EXPECT_THROW(Heading::from_angle(std::nan("")), Error);
  EXPECT_THROW(Heading::from_vector(0.0, 0.0), Error);
  EXPECT_THROW(Heading::from_angle(INFINITY), Error);
}

TEST(Heading, FacingInvertsForward) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> any(-kPi, kPi);
  for (int i = 0; i < 1000; ++i) {
    const Heading h = Heading::from_angle(any(rng));
    const Point2 f = h.forward();
    const Heading back = Heading::facing(f.x, f.z);
    EXPECT_NEAR(back.u(), h.u(), 1e-15);
    EXPECT_NEAR(back.v(), h.v(), 1e-15);
  }
  // Zero yaw looks down -Z; positive yaw turns left (toward -X).
  const Point2 f0 = Heading::from_angle(0.0).forward();
  EXPECT_DOUBLE_EQ(f0.x, -0.0);
  EXPECT_DOUBLE_EQ(f0.z, -1.0);
  const Point2 f90 = Heading::from_angle(deg(90)).forward();
  EXPECT_NEAR(f90.x, -1.0, 1e-15);
  EXPECT_NEAR(f90.z, 0.0, 1e-15);
}

TEST(Pose6To3, IdentityAndYaw) {
  Pose6 p;
  EXPECT_NEAR(pose6_to_pose3(p).heading.angle(), 0.0, 1e-15);
  p.rotation = yaw_rotation(deg(30));
  p.position = Vec3(1.5, 2.0, -3.0);
  const Pose3 q = pose6_to_pose3(p);
  EXPECT_DOUBLE_EQ(q.x, 1.5);
  EXPECT_DOUBLE_EQ(q.z, -3.0);
  EXPECT_NEAR(q.heading.angle(), deg(30), 1e-12);
}

TEST(Pose6To3, IgnoresPitchAndRoll) {
  const Mat3 pitch = Eigen::AngleAxisd(deg(20), Vec3::UnitX()).toRotationMatrix();
  const Mat3 roll = Eigen::AngleAxisd(deg(-8), Vec3::UnitZ()).toRotationMatrix();
  Pose6 p;
  p.rotation = yaw_rotation(deg(-120)) * pitch * roll;
  // Roll about the optical axis and pitch both keep the horizontal forward bearing.
  EXPECT_NEAR(pose6_to_pose3(p).heading.angle(), deg(-120), 1e-12);
}

TEST(Pose6To3, VerticalCameraIsDegenerate) {
  Pose6 p;
  p.rotation = Eigen::AngleAxisd(deg(90), Vec3::UnitX()).toRotationMatrix();
  try {
    pose6_to_pose3(p);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDegeneratePose);
  }
}

TEST(Pose6To3, RejectsNonRotation) {
  Pose6 p;
  p.rotation = Mat3::Identity() * 2.0;
  EXPECT_THROW(pose6_to_pose3(p), Error);
  p.rotation = Mat3::Identity();
  p.rotation(0, 0) = -1.0;  // reflection
  EXPECT_THROW(pose6_to_pose3(p), Error);
}

TEST(GoalVector, DistanceAndBearing) {
  const Pose3 pose{0.0, 0.0, Heading::from_angle(0.0)};  // facing -Z
  auto g = goal_vector(pose, {0.0, -2.0});
  EXPECT_DOUBLE_EQ(g.distance, 2.0);
  EXPECT_NEAR(g.bearing, 0.0, 1e-15);
  g = goal_vector(pose, {-1.0, 0.0});  // to the left
  EXPECT_NEAR(g.bearing, deg(90), 1e-15);
  g = goal_vector(pose, {1.0, 0.0});
  EXPECT_NEAR(g.bearing, deg(-90), 1e-15);
  g = goal_vector(pose, {0.0, 3.0});  // behind
  EXPECT_NEAR(g.bearing, kPi, 1e-15);
  g = goal_vector(pose, {0.0, 0.0});
  EXPECT_EQ(g.distance, 0.0);
  EXPECT_EQ(g.bearing, 0.0);
}

TEST(GoalVector, TurningByBearingFacesTarget) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> coord(-5, 5);
  std::uniform_real_distribution<double> ang(-kPi, kPi);
  for (int i = 0; i < 1000; ++i) {
    Pose3 pose{coord(rng), coord(rng), Heading::from_angle(ang(rng))};
    const Point2 t{coord(rng), coord(rng)};
    const GoalVector g = goal_vector(pose, t);
    EXPECT_GT(g.bearing, -kPi);
    EXPECT_LE(g.bearing, kPi);
    pose.heading = pose.heading.rotated(g.bearing);
    EXPECT_NEAR(goal_vector(pose, t).bearing, 0.0, 1e-9);
  }
}

TEST(Similarity, InverseAndCompose) {
  SimilarityTransform t;
  t.scale = 1.7;
  t.rotation = Eigen::AngleAxisd(0.4, Vec3(0.2, 1.0, -0.3).normalized()).toRotationMatrix();
  t.translation = Vec3(1, -2, 3);
  const Vec3 p(0.3, -0.7, 2.2);
  const Vec3 back = apply_similarity(t.inverse(), apply_similarity(t, p));
  EXPECT_NEAR((back - p).norm(), 0.0, 1e-12);
  const SimilarityTransform id = t.compose(t.inverse());
  EXPECT_NEAR(id.scale, 1.0, 1e-12);
  EXPECT_NEAR((id.rotation - Mat3::Identity()).norm(), 0.0, 1e-12);
  EXPECT_NEAR(id.translation.norm(), 0.0, 1e-12);
  SimilarityTransform bad;
  bad.scale = 0.0;
  EXPECT_THROW(bad.validate(), Error);
}

TEST(Similarity, YawOfPureYawRotation) {
  for (double a : {-170.0, -90.0, -10.0, 0.0, 45.0, 135.0}) {
    SimilarityTransform t;
    t.rotation = yaw_rotation(deg(a));
    EXPECT_NEAR(t.yaw(), deg(a), 1e-12) << a;
  }
}

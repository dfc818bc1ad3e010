#include "realnav/fixtures.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

#include <Eigen/Geometry>

#include "realnav/error.hpp"
#include "realnav/noise.hpp"

namespace realnav {

namespace {

struct Raster {
  int w, h;
  std::vector<std::uint8_t> cells;

  Raster(int width, int height)
      : w(width), h(height), cells(static_cast<std::size_t>(width) * height, 1) {}

  // Inclusive rectangle.
  void fill(int c0, int r0, int c1, int r1, std::uint8_t v) {
    for (int r = r0; r <= r1; ++r) {
      for (int c = c0; c <= c1; ++c) cells[static_cast<std::size_t>(r) * w + c] = v;
    }
  }
  void wall(int c0, int r0, int c1, int r1) { fill(c0, r0, c1, r1, 0); }
  void open(int c0, int r0, int c1, int r1) { fill(c0, r0, c1, r1, 1); }
  void border() {
    wall(0, 0, w - 1, 0);
    wall(0, h - 1, w - 1, h - 1);
    wall(0, 0, 0, h - 1);
    wall(w - 1, 0, w - 1, h - 1);
  }
};

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

OccupancyGrid make_office_grid() {
  Raster g(100, 100);
  g.border();
  // Corridor between rows 41 and 58.
  g.wall(0, 39, 99, 40);
  g.wall(0, 59, 99, 60);
  // Lower rooms: two, split at column 49.
  g.wall(49, 0, 50, 40);
  g.open(20, 39, 29, 40);
  g.open(70, 39, 79, 40);
  // Upper rooms: three.
  g.wall(33, 59, 34, 99);
  g.wall(66, 59, 67, 99);
  g.open(10, 59, 19, 60);
  g.open(45, 59, 54, 60);
  g.open(80, 59, 89, 60);
  // Desks and cabinets.
  g.wall(8, 10, 17, 15);
  g.wall(30, 22, 35, 33);
  g.wall(60, 8, 75, 13);
  g.wall(84, 24, 89, 32);
  g.wall(12, 75, 22, 80);
  g.wall(40, 85, 58, 88);
  g.wall(74, 70, 78, 90);
  // A pillar in the corridor.
  g.wall(60, 48, 63, 51);
  return OccupancyGrid(100, 100, 0.1, 0.0, 0.0, std::move(g.cells));
}

OccupancyGrid make_demo_grid() {
  Raster g(20, 20);
  g.border();
  g.wall(10, 0, 10, 13);
  g.wall(4, 6, 6, 7);
  return OccupancyGrid(20, 20, 0.25, 0.0, 0.0, std::move(g.cells));
}

std::vector<ObservationRecord> make_synthetic_database(const OccupancyGrid& grid,
                                                       const SyntheticDbOptions& opt) {
  if (opt.count == 0 || opt.headings_per_position < 1) {
    throw Error(ErrorCode::kInvalidArgument, "empty synthetic database requested");
  }
  const auto cells = grid.navigable_cells();
  if (cells.empty()) throw Error(ErrorCode::kEmptyMap, "grid has no navigable cell");

  const std::size_t per = static_cast<std::size_t>(opt.headings_per_position);
  const std::size_t positions = (opt.count + per - 1) / per;
  const double area = static_cast<double>(cells.size()) * grid.resolution() * grid.resolution();
  const double x0 = grid.origin_x();
  const double z0 = grid.origin_z();
  const double x1 = x0 + grid.width() * grid.resolution();
  const double z1 = z0 + grid.height() * grid.resolution();

  // Shrink the lattice until it has enough navigable points.
  std::vector<Point2> lattice;
  for (double spacing = std::sqrt(area / static_cast<double>(positions)); spacing > 1e-6;
       spacing *= 0.95) {
    lattice.clear();
    for (double z = z0 + spacing / 2; z < z1; z += spacing) {
      for (double x = x0 + spacing / 2; x < x1; x += spacing) {
        if (is_navigable(grid, {x, z})) lattice.push_back({x, z});
      }
    }
    if (lattice.size() >= positions) break;
  }

  Rng rng(opt.seed);
  std::normal_distribution<double> pos_noise(0.0, 1.0);
  std::vector<ObservationRecord> out;
  out.reserve(opt.count);
  for (std::size_t i = 0; i < opt.count; ++i) {
    const std::size_t p = i / per;
    const std::size_t k = i % per;
    const Point2 base = lattice[p * lattice.size() / positions];
    Point2 pos = base;
    for (int attempt = 0; attempt < 10; ++attempt) {
      const Point2 cand{base.x + opt.position_jitter * pos_noise(rng),
                        base.z + opt.position_jitter * pos_noise(rng)};
      if (is_navigable(grid, cand)) {
        pos = cand;
        break;
      }
    }
    const double theta = 2.0 * std::numbers::pi * static_cast<double>(k) /
                             static_cast<double>(per) +
                         opt.heading_jitter * pos_noise(rng);
    char name[32];
    std::snprintf(name, sizeof name, "images/%05zu.jpg", i + 1);
    out.push_back({static_cast<std::int64_t>(i + 1), name,
                   {pos.x, pos.z, Heading::from_angle(theta)}});
  }
  return out;
}

SfmExport export_sfm_fixture(const std::vector<ObservationRecord>& records,
                             const SimilarityTransform& map_from_sfm, std::size_t count,
                             double noise, std::uint64_t seed, double camera_height) {
  const SimilarityTransform sfm_from_map = map_from_sfm.inverse();
  SfmExport out;
  out.images_txt = "# Image list with two lines of data per image:\n"
                   "#   IMAGE_ID, QW, QX, QY, QZ, TX, TY, TZ, CAMERA_ID, NAME\n"
                   "#   POINTS2D[] as (X, Y, POINT3D_ID)\n";
  for (const auto& r : records) {
    const Mat3 r_wc = map_from_sfm.rotation.transpose() * yaw_rotation(r.pose.heading.angle());
    const Vec3 c = apply_similarity(sfm_from_map, Vec3(r.pose.x, camera_height, r.pose.z));
    const Mat3 r_cw = r_wc.transpose();
    const Vec3 t = -(r_cw * c);
    Eigen::Quaterniond q(r_cw);
    q.normalize();
    out.images_txt += std::to_string(r.id) + " " + fmt(q.w()) + " " + fmt(q.x()) + " " +
                      fmt(q.y()) + " " + fmt(q.z()) + " " + fmt(t.x()) + " " + fmt(t.y()) +
                      " " + fmt(t.z()) + " 1 " + r.image_ref + "\n\n";
  }

  Rng rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, noise > 0.0 ? noise : 1.0);
  double lo_x = 0, hi_x = 1, lo_z = 0, hi_z = 1;
  if (!records.empty()) {
    lo_x = hi_x = records.front().pose.x;
    lo_z = hi_z = records.front().pose.z;
    for (const auto& r : records) {
      lo_x = std::min(lo_x, r.pose.x);
      hi_x = std::max(hi_x, r.pose.x);
      lo_z = std::min(lo_z, r.pose.z);
      hi_z = std::max(hi_z, r.pose.z);
    }
  }
  for (std::size_t i = 0; i < count; ++i) {
    const Vec3 map_pt(lo_x + (hi_x - lo_x) * unit(rng), 2.5 * unit(rng),
                      lo_z + (hi_z - lo_z) * unit(rng));
    Correspondence c;
    c.source = apply_similarity(sfm_from_map, map_pt);
    c.target = map_pt;
    if (noise > 0.0) c.target += Vec3(gauss(rng), gauss(rng), gauss(rng));
    out.correspondences.push_back(c);
  }
  return out;
}

std::string format_correspondences(const std::vector<Correspondence>& pairs) {
  std::string out = "# sx sy sz tx ty tz  (reconstruction point, map point)\n";
  for (const auto& p : pairs) {
    out += fmt(p.source.x()) + " " + fmt(p.source.y()) + " " + fmt(p.source.z()) + " " +
           fmt(p.target.x()) + " " + fmt(p.target.y()) + " " + fmt(p.target.z()) + "\n";
  }
  return out;
}

}  // namespace realnav

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "realnav/geometry.hpp"

namespace realnav {

struct Cell {
  int col = 0;
  int row = 0;

  friend bool operator==(const Cell&, const Cell&) = default;
};

/// Navigable-space raster. Cell (c, r) covers
/// [origin_x + c*res, origin_x + (c+1)*res) x [origin_z + r*res, origin_z + (r+1)*res);
/// each cell owns its low edges. Row 0 is the minimum-z row.
class OccupancyGrid {
 public:
  OccupancyGrid(int width, int height, double resolution, double origin_x,
                double origin_z, std::vector<std::uint8_t> navigable);

  /// All-navigable grid.
  static OccupancyGrid open(int width, int height, double resolution,
                            double origin_x = 0.0, double origin_z = 0.0);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  double resolution() const noexcept { return resolution_; }
  double origin_x() const noexcept { return origin_x_; }
  double origin_z() const noexcept { return origin_z_; }

  std::size_t index(Cell c) const noexcept {
    return static_cast<std::size_t>(c.row) * width_ + c.col;
  }
  Cell cell_at(std::size_t index) const noexcept {
    return {static_cast<int>(index % width_), static_cast<int>(index / width_)};
  }
  bool in_bounds(Cell c) const noexcept {
    return c.col >= 0 && c.row >= 0 && c.col < width_ && c.row < height_;
  }
  bool navigable(Cell c) const noexcept {
    return in_bounds(c) && cells_[index(c)] != 0;
  }

  std::optional<Cell> cell_of(const Point2& p) const noexcept;
  Point2 center(Cell c) const noexcept;

  std::span<const std::size_t> navigable_cells() const noexcept {
    return navigable_;
  }
  std::span<const std::uint8_t> raw() const noexcept { return cells_; }

  /// Same geometry with a modified cell.
  void set_navigable(Cell c, bool value);

 private:
  void rebuild_navigable_list();

  int width_;
  int height_;
  double resolution_;
  double origin_x_;
  double origin_z_;
  std::vector<std::uint8_t> cells_;
  std::vector<std::size_t> navigable_;
};

/// Text map: `width height resolution origin_x origin_z`, then `height` rows of
/// `.`/`#`. Binary PGM (P5) is also accepted, with resolution and origin read
/// from a sidecar `<path>.meta` line `resolution origin_x origin_z`.
OccupancyGrid load_grid(const std::filesystem::path& path);
OccupancyGrid parse_grid(std::istream& in);
void write_grid(std::ostream& out, const OccupancyGrid& grid);

bool is_navigable(const OccupancyGrid& grid, const Point2& p) noexcept;

struct PathResult {
  double length = 0.0;
  std::vector<Point2> waypoints;
};

/// Shortest 8-connected path between the cells containing a and b (straight
/// moves cost res, diagonals res*sqrt(2), no squeezing between two blocked
/// corner cells). The endpoints are snapped to their cell centers and the
/// result is |a - b| plus the path's excess over the center-to-center line, so
/// points in the same cell are joined directly and geodesic >= euclidean.
/// Returns nullopt when no path exists; throws kInvalidEndpoint for
/// non-navigable endpoints.
std::optional<double> geodesic_distance(const OccupancyGrid& grid,
                                        const Point2& a, const Point2& b);

std::optional<PathResult> shortest_path(const OccupancyGrid& grid,
                                        const Point2& a, const Point2& b);

/// Single-source 8-connected distances (meters) between cell centers;
/// unreachable cells hold +infinity. `cell_cost` (optional, per cell) scales
/// the cost of entering a cell.
std::vector<double> distance_field(const OccupancyGrid& grid, Cell source,
                                   std::span<const double> cell_cost = {});

/// Uniform navigable cell, then a uniform point inside it.
/// Throws kEmptyMap when the grid has no navigable cell.
Point2 sample_navigable_point(const OccupancyGrid& grid, std::mt19937_64& rng);

/// Advances along the heading, stopping at the last navigable point before any
/// blocked cell (stop-at-contact, no sliding). The heading is unchanged.
Pose3 attempt_move(const OccupancyGrid& grid, const Pose3& from, double distance);

/// True when every point of the segment (sampled at res/4) is navigable.
bool segment_navigable(const OccupancyGrid& grid, const Point2& a,
                       const Point2& b);

/// Navigable cell nearest (in cell-center distance) to `p`.
std::optional<Cell> nearest_navigable_cell(const OccupancyGrid& grid,
                                           const Point2& p);

}  // namespace realnav

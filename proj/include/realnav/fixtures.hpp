#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "realnav/alignment.hpp"
#include "realnav/observation.hpp"
#include "realnav/world_map.hpp"

namespace realnav {

/// 100x100 office floor at 0.1 m: a central corridor, six rooms with 1 m doors
/// and a few desks.
OccupancyGrid make_office_grid();

/// 20x20 demo map at 0.25 m: outer walls and one partition with a 1.25 m gap.
OccupancyGrid make_demo_grid();

struct SyntheticDbOptions {
  std::size_t count = 500;
  int headings_per_position = 12;
  double position_jitter = 0.05;  // meters
  double heading_jitter = 0.035;  // radians
  std::uint64_t seed = 7;
};

/// Poses on a regular lattice over the navigable space, several evenly spaced
/// headings per lattice point, plus Gaussian jitter. Image references are
/// `images/NNNNN.jpg`, ids start at 1.
std::vector<ObservationRecord> make_synthetic_database(const OccupancyGrid& grid,
                                                       const SyntheticDbOptions& opt = {});

/// The records expressed in a reconstruction frame related to the map frame by
/// `map_from_sfm`: an `images.txt` text, plus `count` reference correspondences
/// (reconstruction point, map point) with optional Gaussian noise on the map side.
struct SfmExport {
  std::string images_txt;
  std::vector<Correspondence> correspondences;
};

SfmExport export_sfm_fixture(const std::vector<ObservationRecord>& records,
                             const SimilarityTransform& map_from_sfm,
                             std::size_t count = 24, double noise = 0.0,
                             std::uint64_t seed = 11, double camera_height = 1.2);

std::string format_correspondences(const std::vector<Correspondence>& pairs);

}  // namespace realnav

#pragma once

#include <cstdint>
#include <string>

#include "realnav/geometry.hpp"

namespace realnav {

/// One image of the real-world model with its planar pose.
struct ObservationRecord {
  std::int64_t id = 0;
  std::string image_ref;
  Pose3 pose;

  friend bool operator==(const ObservationRecord&,
                         const ObservationRecord&) = default;
};

}  // namespace realnav

#pragma once

#include <span>

#include <Eigen/Core>

#include "mapfree/geometry/pose.h"

namespace mapfree {

struct PointPair {
  Eigen::Vector3d source;
  Eigen::Vector3d target;
};

// Least-squares rigid transform with target ≈ R * source + t (no scale).
// Needs at least three non-collinear pairs, otherwise throws
// DegenerateSampleError.
Pose ProcrustesAlign(std::span<const PointPair> pairs);

}  // namespace mapfree

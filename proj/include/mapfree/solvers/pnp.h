#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

#include "mapfree/geometry/camera.h"
#include "mapfree/geometry/pose.h"

namespace mapfree {

// Observation in intrinsics-normalized coordinates of a known 3D point.
struct BearingPoint {
  Eigen::Vector2d ray;
  Eigen::Vector3d point;
};

// Observation in pixels of a known 3D point.
struct PixelPoint {
  Eigen::Vector2d pixel;
  Eigen::Vector3d point;
};

// Minimal absolute pose from exactly three correspondences. Returns up to
// four poses, each reprojecting the sample to within 1e-6 normalized units.
// Throws DegenerateSampleError for collinear or coincident points.
std::vector<Pose> SolveP3P(std::span<const BearingPoint> sample);

struct PnPRefineOptions {
  int max_iterations = 100;
  int max_damping_retries = 10;
  double initial_damping = 1e-4;
  double relative_tolerance = 1e-12;
};

struct PnPRefinement {
  Pose pose;
  double initial_cost = 0.0;  // sum of squared pixel residuals
  double final_cost = 0.0;
  int iterations = 0;
  // Set when no damping level produced a cost decrease from a non-optimal
  // start. `pose` is then the initial pose.
  bool diverged = false;
};

// Damped Gauss-Newton on pixel reprojection error. Needs at least four
// correspondences (InvalidParameterError otherwise).
PnPRefinement RefinePnP(const Pose& initial,
                        std::span<const PixelPoint> inliers,
                        const CameraIntrinsics& k,
                        const PnPRefineOptions& options = {});

// Sum of squared pixel residuals. Points behind the camera contribute +inf.
double ReprojectionCost(const Pose& pose, std::span<const PixelPoint> points,
                        const CameraIntrinsics& k);

}  // namespace mapfree

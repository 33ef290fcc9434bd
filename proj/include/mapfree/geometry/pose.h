#pragma once

#include <Eigen/Core>

#include "mapfree/geometry/rotation.h"

namespace mapfree {

// World-to-camera rigid transform: x_cam = R * y_world + t.
struct Pose {
  Rotation rotation;
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  static Pose Identity() { return Pose{}; }

  Eigen::Vector3d Apply(const Eigen::Vector3d& y) const {
    return rotation * y + translation;
  }
};

// (a ∘ b)(y) = a(b(y)).
Pose Compose(const Pose& a, const Pose& b);
Pose Inverse(const Pose& p);
// Pose of `query` in the frame anchored at `ref`: query ∘ ref⁻¹.
Pose Relative(const Pose& ref, const Pose& query);

// c = -Rᵀ t.
Eigen::Vector3d CameraCenter(const Pose& p);

// Angle of R * R_gtᵀ in degrees, in [0, 180].
double RotationErrorDeg(const Rotation& r, const Rotation& r_gt);
// Distance between camera centers in meters.
double TranslationErrorM(const Pose& p, const Pose& p_gt);

}  // namespace mapfree

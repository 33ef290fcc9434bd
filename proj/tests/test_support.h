#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "mapfree/geometry/camera.h"
#include "mapfree/geometry/pose.h"
#include "mapfree/geometry/rotation.h"
#include "mapfree/random.h"

namespace mapfree::testing {

inline double Deg2Rad(double deg) { return deg * std::numbers::pi / 180.0; }

inline Eigen::Vector3d RandomUnit(Rng& rng) {
  Eigen::Vector3d v(rng.Normal(), rng.Normal(), rng.Normal());
  return v.normalized();
}

inline Rotation RandomRotation(Rng& rng, double max_angle_deg = 180.0) {
  return Rotation(Eigen::AngleAxisd(rng.Uniform(0.0, Deg2Rad(max_angle_deg)),
                                    RandomUnit(rng))
                      .toRotationMatrix());
}

inline Pose RandomPose(Rng& rng, double max_angle_deg = 180.0,
                       double max_translation = 2.0) {
  return Pose{RandomRotation(rng, max_angle_deg),
              rng.Uniform(0.0, max_translation) * RandomUnit(rng)};
}

// Points in front of the identity camera.
inline std::vector<Eigen::Vector3d> RandomPoints(Rng& rng, int n,
                                                 double min_depth = 2.0,
                                                 double max_depth = 8.0) {
  std::vector<Eigen::Vector3d> out;
  for (int i = 0; i < n; ++i) {
    const double z = rng.Uniform(min_depth, max_depth);
    out.emplace_back(rng.Uniform(-0.5, 0.5) * z, rng.Uniform(-0.4, 0.4) * z, z);
  }
  return out;
}

inline Eigen::Matrix3d Rx(double deg) {
  return Eigen::AngleAxisd(Deg2Rad(deg), Eigen::Vector3d::UnitX())
      .toRotationMatrix();
}
inline Eigen::Matrix3d Ry(double deg) {
  return Eigen::AngleAxisd(Deg2Rad(deg), Eigen::Vector3d::UnitY())
      .toRotationMatrix();
}
inline Eigen::Matrix3d Rz(double deg) {
  return Eigen::AngleAxisd(Deg2Rad(deg), Eigen::Vector3d::UnitZ())
      .toRotationMatrix();
}

inline double MaxAbsDiff(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

inline CameraIntrinsics TestCamera() {
  CameraIntrinsics k;
  k.fx = k.fy = 500.0;
  k.cx = 320.0;
  k.cy = 240.0;
  k.width = 640;
  k.height = 480;
  return k;
}

}  // namespace mapfree::testing

#include "mapfree/geometry/pose.h"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace mapfree {

Pose Compose(const Pose& a, const Pose& b) {
  return {a.rotation * b.rotation, a.rotation * b.translation + a.translation};
}

Pose Inverse(const Pose& p) {
  const Rotation rt = p.rotation.Transpose();
  return {rt, -(rt * p.translation)};
}

Pose Relative(const Pose& ref, const Pose& query) {
  return Compose(query, Inverse(ref));
}

Eigen::Vector3d CameraCenter(const Pose& p) {
  return -(p.rotation.matrix().transpose() * p.translation);
}

double RotationErrorDeg(const Rotation& r, const Rotation& r_gt) {
  // d = R R_gtᵀ summed in a fixed order, so swapping the arguments yields
  // exactly dᵀ and the error is bit-symmetric. atan2 of (sin, cos) keeps
  // resolution near zero where acos loses about 1e-6 degrees.
  const Eigen::Matrix3d& a = r.matrix();
  const Eigen::Matrix3d& b = r_gt.matrix();
  double d[3][3];
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      d[i][j] = a(i, 0) * b(j, 0) + a(i, 1) * b(j, 1) + a(i, 2) * b(j, 2);
    }
  }
  const double c = 0.5 * (d[0][0] + d[1][1] + d[2][2] - 1.0);
  const double s = 0.5 * std::sqrt((d[2][1] - d[1][2]) * (d[2][1] - d[1][2]) +
                                   (d[0][2] - d[2][0]) * (d[0][2] - d[2][0]) +
                                   (d[1][0] - d[0][1]) * (d[1][0] - d[0][1]));
  return std::atan2(s, c) * 180.0 / std::numbers::pi;
}

double TranslationErrorM(const Pose& p, const Pose& p_gt) {
  return (CameraCenter(p) - CameraCenter(p_gt)).norm();
}

}  // namespace mapfree

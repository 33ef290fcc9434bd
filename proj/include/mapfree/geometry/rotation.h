#pragma once

#include <Eigen/Core>

namespace mapfree {

// Element of SO(3). Construction validates orthonormality and det = +1
// to within kRotationTolerance per entry.
class Rotation {
 public:
  static constexpr double kRotationTolerance = 1e-9;

  Rotation() : matrix_(Eigen::Matrix3d::Identity()) {}

  // Throws InvalidParameterError if `m` is not a proper rotation.
  explicit Rotation(const Eigen::Matrix3d& m);

  static Rotation Identity() { return Rotation(); }
  static Rotation AboutAxis(const Eigen::Vector3d& axis, double angle_rad);

  // True when `m` passes the orthonormality and determinant checks.
  static bool IsValid(const Eigen::Matrix3d& m,
                      double tolerance = kRotationTolerance);

  const Eigen::Matrix3d& matrix() const { return matrix_; }
  Rotation Transpose() const;
  Eigen::Vector3d operator*(const Eigen::Vector3d& v) const {
    return matrix_ * v;
  }
  Rotation operator*(const Rotation& other) const;

 private:
  struct Unchecked {};
  Rotation(const Eigen::Matrix3d& m, Unchecked) : matrix_(m) {}

  Eigen::Matrix3d matrix_;
};

// Scalar-first unit quaternion (w, x, y, z).
struct Quaternion {
  double w = 1.0;
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  double Norm() const;
};

// Two 3-vectors orthonormalized by partial Gram-Schmidt.
struct SixDRotationParam {
  Eigen::Vector3d a;
  Eigen::Vector3d b;
};

// One-degree bins: yaw and roll in [0, 360), pitch in [0, 180) where the
// pitch bin 90 is zero pitch.
struct DiscreteEuler {
  int yaw_index = 0;
  int roll_index = 0;
  int pitch_index = 90;
};

// Scale times the unit vector at azimuth `phi_deg` in the XZ plane
// (measured from +Z towards +X) and inclination `theta_deg` from +Y.
struct SphericalTranslation {
  int phi_deg = 0;    // [0, 360)
  int theta_deg = 0;  // [0, 180]
  double scale = 0.0;
};

// Normalizes `q` first; only a zero quaternion is rejected.
Rotation RotationFromQuaternion(const Quaternion& q);
// Inverse conversion with the sign fixed so that w >= 0.
Quaternion QuaternionFromRotation(const Rotation& r);

Rotation RotationFrom6D(const SixDRotationParam& p);

// R = Ry(yaw) * Rx(pitch) * Rz(roll).
Rotation RotationFromDiscreteEuler(const DiscreteEuler& e);

Eigen::Vector3d TranslationFromSpherical(const SphericalTranslation& st);

}  // namespace mapfree

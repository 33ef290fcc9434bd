#include "mapfree/geometry/rotation.h"

#include <cmath>
#include <numbers>

#include <Eigen/Geometry>

#include "mapfree/error.h"

namespace mapfree {
namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;
constexpr double kZeroNorm = 1e-12;

}  // namespace

Rotation::Rotation(const Eigen::Matrix3d& m) : matrix_(m) {
  if (!IsValid(m)) {
    throw InvalidParameterError("matrix is not a proper rotation");
  }
}

Rotation Rotation::AboutAxis(const Eigen::Vector3d& axis, double angle_rad) {
  const double n = axis.norm();
  if (!(n > kZeroNorm)) {
    throw InvalidParameterError("rotation axis must be non-zero");
  }
  return Rotation(Eigen::AngleAxisd(angle_rad, axis / n).toRotationMatrix(),
                  Unchecked{});
}

bool Rotation::IsValid(const Eigen::Matrix3d& m, double tolerance) {
  if (!m.allFinite()) return false;
  const Eigen::Matrix3d gram = m.transpose() * m;
  if ((gram - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() > tolerance) {
    return false;
  }
  return std::abs(m.determinant() - 1.0) <= tolerance;
}

Rotation Rotation::Transpose() const {
  return Rotation(matrix_.transpose(), Unchecked{});
}

Rotation Rotation::operator*(const Rotation& other) const {
  return Rotation(matrix_ * other.matrix_, Unchecked{});
}

double Quaternion::Norm() const {
  return std::sqrt(w * w + x * x + y * y + z * z);
}

Rotation RotationFromQuaternion(const Quaternion& q) {
  const double n = q.Norm();
  if (!std::isfinite(n) || n < kZeroNorm) {
    throw InvalidParameterError("quaternion has zero norm");
  }
  const double w = q.w / n, x = q.x / n, y = q.y / n, z = q.z / n;
  Eigen::Matrix3d m;
  m << 1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y),
      2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
      2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y);
  return Rotation(m);
}

Quaternion QuaternionFromRotation(const Rotation& r) {
  Eigen::Quaterniond q(r.matrix());
  q.normalize();
  if (q.w() < 0) q.coeffs() *= -1.0;
  return {q.w(), q.x(), q.y(), q.z()};
}

Rotation RotationFrom6D(const SixDRotationParam& p) {
  const double na = p.a.norm();
  if (!std::isfinite(na) || na < kZeroNorm) {
    throw InvalidParameterError("6D rotation: first vector is zero");
  }
  const Eigen::Vector3d c1 = p.a / na;
  const Eigen::Vector3d b_perp = p.b - p.b.dot(c1) * c1;
  const double nb = b_perp.norm();
  if (!std::isfinite(nb) || nb <= kZeroNorm * std::max(1.0, p.b.norm())) {
    throw InvalidParameterError(
        "6D rotation: second vector is zero or parallel to the first");
  }
  const Eigen::Vector3d c2 = b_perp / nb;
  Eigen::Matrix3d m;
  m.col(0) = c1;
  m.col(1) = c2;
  m.col(2) = c1.cross(c2);
  return Rotation(m);
}

Rotation RotationFromDiscreteEuler(const DiscreteEuler& e) {
  if (e.yaw_index < 0 || e.yaw_index >= 360 || e.roll_index < 0 ||
      e.roll_index >= 360 || e.pitch_index < 0 || e.pitch_index >= 180) {
    throw InvalidParameterError("discrete Euler index out of range");
  }
  const double yaw = e.yaw_index * kDegToRad;
  const double pitch = (e.pitch_index - 90) * kDegToRad;
  const double roll = e.roll_index * kDegToRad;
  const Eigen::Matrix3d m =
      (Eigen::AngleAxisd(yaw, Eigen::Vector3d::UnitY()) *
       Eigen::AngleAxisd(pitch, Eigen::Vector3d::UnitX()) *
       Eigen::AngleAxisd(roll, Eigen::Vector3d::UnitZ()))
          .toRotationMatrix();
  return Rotation(m);
}

Eigen::Vector3d TranslationFromSpherical(const SphericalTranslation& st) {
  if (!(st.scale >= 0.0) || !std::isfinite(st.scale)) {
    throw InvalidParameterError("translation scale must be non-negative");
  }
  if (st.phi_deg < 0 || st.phi_deg >= 360 || st.theta_deg < 0 ||
      st.theta_deg > 180) {
    throw InvalidParameterError("spherical bin out of range");
  }
  const double phi = st.phi_deg * kDegToRad;
  const double theta = st.theta_deg * kDegToRad;
  const Eigen::Vector3d dir(std::sin(theta) * std::sin(phi), std::cos(theta),
                            std::sin(theta) * std::cos(phi));
  return st.scale * dir;
}

}  // namespace mapfree

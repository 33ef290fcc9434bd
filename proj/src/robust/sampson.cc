#include "mapfree/robust/sampson.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>
#include <Eigen/Geometry>

namespace mapfree {
namespace {

// Sampson residual with sign, for least squares.
double SignedSampson(const Eigen::Matrix3d& e, const NormalizedMatch& m) {
  const Eigen::Vector3d r = m.ref.homogeneous();
  const Eigen::Vector3d q = m.query.homogeneous();
  const Eigen::Vector3d er = e * r;
  const Eigen::Vector3d etq = e.transpose() * q;
  const double denom =
      er.x() * er.x() + er.y() * er.y() + etq.x() * etq.x() + etq.y() * etq.y();
  if (!(denom > 0.0)) return 0.0;
  return q.dot(er) / std::sqrt(denom);
}

Eigen::Matrix3d Skew(const Eigen::Vector3d& v) {
  Eigen::Matrix3d m;
  m << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
  return m;
}

struct Motion {
  Eigen::Matrix3d r;
  Eigen::Vector3d t;  // unit

  Eigen::Matrix3d E() const { return Skew(t) * r; }

  // Left rotation increment delta(0..2), translation increment delta(3..4)
  // in the tangent plane of the unit sphere.
  Motion Plus(const Eigen::Matrix<double, 5, 1>& delta) const {
    const Eigen::Vector3d w = delta.head<3>();
    const double angle = w.norm();
    Eigen::Matrix3d dr = Eigen::Matrix3d::Identity();
    if (angle > 0.0) dr = Eigen::AngleAxisd(angle, w / angle).toRotationMatrix();
    Eigen::Vector3d a = t.unitOrthogonal();
    Eigen::Vector3d b = t.cross(a);
    return {dr * r, (t + delta(3) * a + delta(4) * b).normalized()};
  }
};

double Cost(const Motion& m, std::span<const NormalizedMatch> matches) {
  const Eigen::Matrix3d e = m.E();
  double c = 0.0;
  for (const NormalizedMatch& x : matches) {
    const double s = SignedSampson(e, x);
    c += s * s;
  }
  return c;
}

}  // namespace

double SampsonError(const EssentialMatrix& e, const NormalizedMatch& m) {
  const Eigen::Vector3d r = m.ref.homogeneous();
  const Eigen::Vector3d q = m.query.homogeneous();
  const Eigen::Vector3d er = e.matrix * r;
  const Eigen::Vector3d etq = e.matrix.transpose() * q;
  const double c = q.dot(er);
  const double denom =
      er.x() * er.x() + er.y() * er.y() + etq.x() * etq.x() + etq.y() * etq.y();
  if (!(denom > 0.0)) {
    return c == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  }
  return std::abs(c) / std::sqrt(denom);
}

EssentialMatrix RefineEssentialSampson(const EssentialMatrix& e,
                                       std::span<const NormalizedMatch> matches,
                                       int max_iterations) {
  if (matches.size() < 5) return e;
  const RelativeMotion start = EssentialCandidates(e)[0];
  Motion m{start.rotation.matrix(), start.direction};
  double cost = Cost(m, matches);
  double lambda = 1e-3;
  const std::size_t n = matches.size();
  Eigen::MatrixXd jac(n, 5);
  Eigen::VectorXd res(n);
  constexpr double kStep = 1e-7;
  for (int it = 0; it < max_iterations; ++it) {
    const Eigen::Matrix3d e0 = m.E();
    for (std::size_t i = 0; i < n; ++i) res(i) = SignedSampson(e0, matches[i]);
    for (int k = 0; k < 5; ++k) {
      Eigen::Matrix<double, 5, 1> d = Eigen::Matrix<double, 5, 1>::Zero();
      d(k) = kStep;
      const Eigen::Matrix3d ep = m.Plus(d).E();
      d(k) = -kStep;
      const Eigen::Matrix3d em = m.Plus(d).E();
      for (std::size_t i = 0; i < n; ++i) {
        jac(i, k) = (SignedSampson(ep, matches[i]) -
                     SignedSampson(em, matches[i])) / (2 * kStep);
      }
    }
    const Eigen::Matrix<double, 5, 5> jtj = jac.transpose() * jac;
    const Eigen::Matrix<double, 5, 1> jtr = jac.transpose() * res;
    bool accepted = false;
    for (int tries = 0; tries < 10 && !accepted; ++tries) {
      Eigen::Matrix<double, 5, 5> a = jtj;
      a.diagonal() *= 1.0 + lambda;
      const Eigen::Matrix<double, 5, 1> delta = -a.ldlt().solve(jtr);
      if (!delta.allFinite()) break;
      const Motion next = m.Plus(delta);
      const double next_cost = Cost(next, matches);
      if (next_cost < cost) {
        const double gain = cost - next_cost;
        m = next;
        cost = next_cost;
        lambda = std::max(lambda * 0.1, 1e-12);
        accepted = true;
        if (gain < 1e-12 * cost) return {m.E().normalized()};
      } else {
        lambda *= 10.0;
      }
    }
    if (!accepted) break;
  }
  return {m.E().normalized()};
}

}  // namespace mapfree

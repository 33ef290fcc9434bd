#include "mapfree/solvers/pnp.h"

#include <array>
#include <cmath>

#include <Eigen/Dense>
#include <Eigen/Geometry>

#include "mapfree/error.h"
#include "mapfree/solvers/polynomial.h"
#include "mapfree/solvers/procrustes.h"

namespace mapfree {
namespace {

// Newton steps on s_i² + s_j² - 2 s_i s_j c_ij = d_ij. Quartic roots can be
// poorly conditioned; a few steps restore full precision. A step is kept
// only if it lowers the residual.
void PolishDistances(std::array<double, 3>& s, const std::array<double, 3>& c,
                     const std::array<double, 3>& d) {
  // Pairs (0,1), (0,2), (1,2) with cosines c12, c13, c23.
  constexpr int kI[3] = {0, 0, 1};
  constexpr int kJ[3] = {1, 2, 2};
  const auto residual = [&](const std::array<double, 3>& x) {
    Eigen::Vector3d r;
    for (int e = 0; e < 3; ++e) {
      const double a = x[kI[e]], b = x[kJ[e]];
      r(e) = a * a + b * b - 2.0 * a * b * c[e] - d[e];
    }
    return r;
  };
  Eigen::Vector3d r = residual(s);
  for (int iter = 0; iter < 5 && r.squaredNorm() > 0.0; ++iter) {
    Eigen::Matrix3d j = Eigen::Matrix3d::Zero();
    for (int e = 0; e < 3; ++e) {
      const double a = s[kI[e]], b = s[kJ[e]];
      j(e, kI[e]) = 2.0 * a - 2.0 * b * c[e];
      j(e, kJ[e]) = 2.0 * b - 2.0 * a * c[e];
    }
    const Eigen::Vector3d step = j.partialPivLu().solve(-r);
    if (!step.allFinite()) return;
    std::array<double, 3> next = {s[0] + step(0), s[1] + step(1),
                                  s[2] + step(2)};
    const Eigen::Vector3d rn = residual(next);
    if (!(rn.squaredNorm() < r.squaredNorm())) return;
    s = next;
    r = rn;
  }
}

}  // namespace

// Law-of-cosines formulation: with distances s_i along the unit bearings,
// s_j = u s_1 and s_k = v s_1 reduce the system to two quadratics in u whose
// resultant is a quartic in v.
std::vector<Pose> SolveP3P(std::span<const BearingPoint> sample) {
  if (sample.size() != 3) {
    throw InvalidParameterError("P3P needs exactly 3 correspondences");
  }
  std::array<Eigen::Vector3d, 3> f, p;
  for (int i = 0; i < 3; ++i) {
    f[i] = sample[i].ray.homogeneous().normalized();
    p[i] = sample[i].point;
  }
  const double d12 = (p[0] - p[1]).squaredNorm();
  const double d13 = (p[0] - p[2]).squaredNorm();
  const double d23 = (p[1] - p[2]).squaredNorm();
  const double area = (p[1] - p[0]).cross(p[2] - p[0]).norm();
  if (!(d12 > 0.0 && d13 > 0.0 && d23 > 0.0) ||
      !(area > 1e-10 * std::max({d12, d13, d23}))) {
    throw DegenerateSampleError("P3P points are collinear or coincident");
  }

  const double c12 = f[0].dot(f[1]);
  const double c13 = f[0].dot(f[2]);
  const double c23 = f[1].dot(f[2]);
  const double ka = d23 / d12;
  const double kb = d13 / d12;

  // A(u) = a2 u² + a1(v) u + a0(v), B(u) = b2 u² + b1 u + b0(v).
  const Polynomial a2({1.0 - ka});
  const Polynomial a1({2.0 * c12 * ka, -2.0 * c23});
  const Polynomial a0({-ka, 0.0, 1.0});
  const Polynomial b2({-kb});
  const Polynomial b1({2.0 * c12 * kb});
  const Polynomial b0({1.0 - kb, -2.0 * c13, 1.0});

  const Polynomial g = a2 * b0 - a0 * b2;
  const Polynomial h = a2 * b1 - a1 * b2;
  const Polynomial resultant = g * g - h * (a1 * b0 - a0 * b1);

  std::vector<Pose> poses;
  for (const double v : RealRoots(resultant, 1e-8)) {
    if (!(v > 0.0)) continue;
    std::vector<double> us;
    const double hv = h(v);
    if (std::abs(hv) > 1e-12) {
      us.push_back(-g(v) / hv);
    } else {
      // Solve B(u) = 0 directly; its leading coefficient is non-zero.
      const double qa = b2(v), qb = b1(v), qc = b0(v);
      const double disc = qb * qb - 4.0 * qa * qc;
      if (disc < 0.0) continue;
      us.push_back((-qb + std::sqrt(disc)) / (2.0 * qa));
      us.push_back((-qb - std::sqrt(disc)) / (2.0 * qa));
    }
    for (const double u : us) {
      if (!(u > 0.0)) continue;
      const double denom = 1.0 + u * u - 2.0 * u * c12;
      if (!(denom > 0.0)) continue;
      const double s1 = std::sqrt(d12 / denom);
      std::array<double, 3> s = {s1, u * s1, v * s1};
      PolishDistances(s, {c12, c13, c23}, {d12, d13, d23});
      std::array<PointPair, 3> pairs;
      for (int i = 0; i < 3; ++i) pairs[i] = {p[i], s[i] * f[i]};
      Pose pose;
      try {
        pose = ProcrustesAlign(pairs);
      } catch (const DegenerateSampleError&) {
        continue;
      }
      bool reprojects = true;
      for (int i = 0; i < 3; ++i) {
        const Eigen::Vector3d x = pose.Apply(p[i]);
        if (!(x.z() > 0.0) ||
            (x.hnormalized() - sample[i].ray).norm() > 1e-6) {
          reprojects = false;
          break;
        }
      }
      if (reprojects) poses.push_back(pose);
    }
  }
  return poses;
}

}  // namespace mapfree

#include "mapfree/solvers/pnp.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>
#include <Eigen/Geometry>

#include "mapfree/error.h"

namespace mapfree {
namespace {

Eigen::Matrix3d Skew(const Eigen::Vector3d& v) {
  Eigen::Matrix3d m;
  m << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
  return m;
}

// Left perturbation: R <- exp([w]x) R, t <- t + dt.
Pose Perturb(const Pose& pose, const Eigen::Matrix<double, 6, 1>& delta) {
  const Eigen::Vector3d w = delta.head<3>();
  const double angle = w.norm();
  Eigen::Matrix3d dr = Eigen::Matrix3d::Identity();
  if (angle > 0.0) dr = Eigen::AngleAxisd(angle, w / angle).toRotationMatrix();
  Eigen::Matrix3d r = dr * pose.rotation.matrix();
  // Re-orthonormalize to stay within the Rotation tolerance over many steps.
  const Eigen::JacobiSVD<Eigen::Matrix3d> svd(
      r, Eigen::ComputeFullU | Eigen::ComputeFullV);
  r = svd.matrixU() * svd.matrixV().transpose();
  return {Rotation(r), pose.translation + delta.tail<3>()};
}

}  // namespace

double ReprojectionCost(const Pose& pose, std::span<const PixelPoint> points,
                        const CameraIntrinsics& k) {
  double cost = 0.0;
  for (const PixelPoint& pp : points) {
    const Eigen::Vector3d x = pose.Apply(pp.point);
    if (!(x.z() > 0.0)) return std::numeric_limits<double>::infinity();
    const Eigen::Vector2d px(k.fx * x.x() / x.z() + k.cx,
                             k.fy * x.y() / x.z() + k.cy);
    cost += (px - pp.pixel).squaredNorm();
  }
  return cost;
}

PnPRefinement RefinePnP(const Pose& initial,
                        std::span<const PixelPoint> inliers,
                        const CameraIntrinsics& k,
                        const PnPRefineOptions& options) {
  if (inliers.size() < 4) {
    throw InvalidParameterError("PnP refinement needs at least 4 inliers");
  }
  PnPRefinement result;
  result.pose = initial;
  result.initial_cost = ReprojectionCost(initial, inliers, k);
  result.final_cost = result.initial_cost;
  if (!std::isfinite(result.initial_cost) || result.initial_cost == 0.0) {
    return result;
  }

  double damping = options.initial_damping;
  double cost = result.initial_cost;
  bool any_accepted = false;
  for (int iter = 0; iter < options.max_iterations; ++iter) {
    Eigen::Matrix<double, 6, 6> jtj = Eigen::Matrix<double, 6, 6>::Zero();
    Eigen::Matrix<double, 6, 1> jtr = Eigen::Matrix<double, 6, 1>::Zero();
    for (const PixelPoint& pp : inliers) {
      const Eigen::Vector3d rp = result.pose.rotation * pp.point;
      const Eigen::Vector3d x = rp + result.pose.translation;
      const double iz = 1.0 / x.z();
      Eigen::Matrix<double, 2, 3> dproj;
      dproj << k.fx * iz, 0, -k.fx * x.x() * iz * iz, 0, k.fy * iz,
          -k.fy * x.y() * iz * iz;
      Eigen::Matrix<double, 3, 6> dx;
      dx.leftCols<3>() = -Skew(rp);
      dx.rightCols<3>().setIdentity();
      const Eigen::Matrix<double, 2, 6> j = dproj * dx;
      const Eigen::Vector2d r(k.fx * x.x() * iz + k.cx - pp.pixel.x(),
                              k.fy * x.y() * iz + k.cy - pp.pixel.y());
      jtj += j.transpose() * j;
      jtr += j.transpose() * r;
    }

    bool accepted = false;
    double new_cost = cost;
    Pose candidate = result.pose;
    for (int retry = 0; retry <= options.max_damping_retries; ++retry) {
      Eigen::Matrix<double, 6, 6> damped = jtj;
      for (int d = 0; d < 6; ++d)
        damped(d, d) += damping * std::max(jtj(d, d), 1e-12);
      const Eigen::Matrix<double, 6, 1> step = damped.ldlt().solve(-jtr);
      if (step.allFinite()) {
        candidate = Perturb(result.pose, step);
        new_cost = ReprojectionCost(candidate, inliers, k);
        if (new_cost < cost) {
          accepted = true;
          damping = std::max(damping / 10.0, 1e-12);
          break;
        }
      }
      damping *= 10.0;
    }

    if (!accepted) {
      if (!any_accepted) {
        // Expected decrease of the undamped Gauss-Newton step. Below
        // (1e-9 px)^2 per point it is rounding noise, not divergence.
        const double predicted = -jtr.dot(jtj.ldlt().solve(-jtr));
        const double noise =
            std::max(1e-8 * cost, 1e-18 * static_cast<double>(inliers.size()));
        result.diverged =
            std::isfinite(predicted) && 0.5 * std::abs(predicted) > noise;
      }
      break;
    }
    any_accepted = true;
    ++result.iterations;
    const double change = (cost - new_cost) / cost;
    result.pose = candidate;
    cost = new_cost;
    if (change < options.relative_tolerance || cost == 0.0) break;
  }
  result.final_cost = cost;
  return result;
}

}  // namespace mapfree

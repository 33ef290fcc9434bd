#include "mapfree/solvers/procrustes.h"

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "mapfree/error.h"

namespace mapfree {
namespace {

// Second singular value of the centered scatter relative to the first.
bool SpreadsInPlane(const Eigen::Matrix3Xd& centered) {
  const Eigen::JacobiSVD<Eigen::Matrix3Xd> svd(centered);
  const Eigen::Vector3d s = svd.singularValues();
  return s(0) > 0.0 && s(1) > 1e-10 * s(0);
}

}  // namespace

Pose ProcrustesAlign(std::span<const PointPair> pairs) {
  const Eigen::Index n = static_cast<Eigen::Index>(pairs.size());
  if (n < 3) {
    throw DegenerateSampleError("Procrustes needs at least 3 point pairs");
  }
  Eigen::Matrix3Xd src(3, n), dst(3, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    src.col(i) = pairs[i].source;
    dst.col(i) = pairs[i].target;
  }
  if (!src.allFinite() || !dst.allFinite()) {
    throw DegenerateSampleError("Procrustes input is not finite");
  }
  const Eigen::Vector3d src_mean = src.rowwise().mean();
  const Eigen::Vector3d dst_mean = dst.rowwise().mean();
  src.colwise() -= src_mean;
  dst.colwise() -= dst_mean;
  if (!SpreadsInPlane(src) || !SpreadsInPlane(dst)) {
    throw DegenerateSampleError("Procrustes points are collinear");
  }

  const Eigen::Matrix3d cov = dst * src.transpose();
  const Eigen::JacobiSVD<Eigen::Matrix3d> svd(
      cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d d = Eigen::Matrix3d::Identity();
  if ((svd.matrixU() * svd.matrixV().transpose()).determinant() < 0.0) {
    d(2, 2) = -1.0;
  }
  const Eigen::Matrix3d r = svd.matrixU() * d * svd.matrixV().transpose();
  return {Rotation(r), dst_mean - r * src_mean};
}

}  // namespace mapfree

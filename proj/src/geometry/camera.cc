#include "mapfree/geometry/camera.h"

#include <cmath>

#include "mapfree/error.h"

namespace mapfree {

void CameraIntrinsics::Validate() const {
  if (!(fx > 0.0) || !(fy > 0.0) || !std::isfinite(fx) ||
      !std::isfinite(fy)) {
    throw InvalidParameterError("focal lengths must be positive");
  }
  if (width <= 0 || height <= 0) {
    throw InvalidParameterError("image dimensions must be positive");
  }
  if (!(cx >= 0.0 && cx < width && cy >= 0.0 && cy < height)) {
    throw InvalidParameterError("principal point outside the image");
  }
}

double CameraIntrinsics::Diagonal() const {
  return std::hypot(static_cast<double>(width), static_cast<double>(height));
}

bool CameraIntrinsics::Contains(const Eigen::Vector2d& px) const {
  return px.x() >= 0.0 && px.x() < width && px.y() >= 0.0 &&
         px.y() < height;
}

Eigen::Vector2d Project(const CameraIntrinsics& k, const Eigen::Vector3d& x) {
  if (!(x.z() > 0.0)) {
    throw BehindCameraError("point is not in front of the camera");
  }
  return {k.fx * x.x() / x.z() + k.cx, k.fy * x.y() / x.z() + k.cy};
}

Eigen::Vector3d Backproject(const CameraIntrinsics& k,
                            const Eigen::Vector2d& px, double depth) {
  if (!(depth > 0.0) || !std::isfinite(depth)) {
    throw InvalidDepthError("depth must be positive and finite");
  }
  return {(px.x() - k.cx) / k.fx * depth, (px.y() - k.cy) / k.fy * depth,
          depth};
}

}  // namespace mapfree

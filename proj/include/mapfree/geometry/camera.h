#pragma once

#include <Eigen/Core>

namespace mapfree {

// Pinhole intrinsics plus image size.
struct CameraIntrinsics {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 1;
  int height = 1;

  // Throws InvalidParameterError unless fx, fy > 0 and the principal point
  // lies inside the image.
  void Validate() const;

  double Diagonal() const;

  // Pixel to intrinsics-normalized coordinates.
  Eigen::Vector2d Normalize(const Eigen::Vector2d& px) const {
    return {(px.x() - cx) / fx, (px.y() - cy) / fy};
  }
  Eigen::Vector2d Denormalize(const Eigen::Vector2d& xy) const {
    return {fx * xy.x() + cx, fy * xy.y() + cy};
  }

  // Pixel bounds used everywhere in the toolkit: 0 <= u < width,
  // 0 <= v < height.
  bool Contains(const Eigen::Vector2d& px) const;
};

// Throws BehindCameraError when x.z() <= 0. No clipping to image bounds.
Eigen::Vector2d Project(const CameraIntrinsics& k, const Eigen::Vector3d& x);

// Throws InvalidDepthError for non-positive or non-finite depth.
Eigen::Vector3d Backproject(const CameraIntrinsics& k,
                            const Eigen::Vector2d& px, double depth);

}  // namespace mapfree

#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <vector>

#include <Eigen/Core>

namespace mapfree {

// One 2D-2D match between the reference and the query image, in pixels.
struct Correspondence {
  Eigen::Vector2d ref_px;
  Eigen::Vector2d query_px;
  double score = 1.0;  // [0, 1]; not used for weighting
};

using CorrespondenceSet = std::vector<Correspondence>;

// Nearest pixel index for a continuous coordinate, clamped to [0, size).
int NearestPixel(double coord, int size);

// Row-major metric depth in meters. Non-positive or non-finite values mark
// invalid pixels.
struct DepthMap {
  int width = 0;
  int height = 0;
  std::vector<float> values;

  DepthMap() = default;
  DepthMap(int w, int h, float fill = 0.0f)
      : width(w), height(h), values(static_cast<std::size_t>(w) * h, fill) {}

  static bool IsValidDepth(float d) { return d > 0.0f && std::isfinite(d); }

  float& at(int x, int y) {
    return values[static_cast<std::size_t>(y) * width + x];
  }
  float at(int x, int y) const {
    return values[static_cast<std::size_t>(y) * width + x];
  }

  std::size_t ValidCount() const;

  // Nearest-neighbor lookup at a pixel location; nullopt when the pixel is
  // outside the map or holds an invalid depth.
  std::optional<double> Sample(const Eigen::Vector2d& px) const;
};

}  // namespace mapfree

#include "mapfree/data.h"

#include <algorithm>
#include <cmath>

namespace mapfree {

int NearestPixel(double coord, int size) {
  const double r = std::floor(coord + 0.5);
  if (r < 0.0) return 0;
  if (r >= size) return size - 1;
  return static_cast<int>(r);
}

std::size_t DepthMap::ValidCount() const {
  return static_cast<std::size_t>(
      std::count_if(values.begin(), values.end(), IsValidDepth));
}

std::optional<double> DepthMap::Sample(const Eigen::Vector2d& px) const {
  if (!(px.x() >= 0.0 && px.x() < width && px.y() >= 0.0 &&
        px.y() < height)) {
    return std::nullopt;
  }
  const float d = at(NearestPixel(px.x(), width), NearestPixel(px.y(), height));
  if (!IsValidDepth(d)) return std::nullopt;
  return static_cast<double>(d);
}

}  // namespace mapfree

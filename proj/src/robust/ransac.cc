#include "mapfree/robust/ransac.h"

#include <utility>

namespace mapfree {

void RansacConfig::Validate() const {
  if (max_iterations < 1) {
    throw InvalidParameterError("max_iterations must be at least 1");
  }
  if (!(inlier_threshold > 0.0) || !std::isfinite(inlier_threshold)) {
    throw InvalidParameterError("inlier_threshold must be positive");
  }
  if (!(confidence > 0.0 && confidence < 1.0)) {
    throw InvalidParameterError("confidence must lie in (0, 1)");
  }
}

std::size_t AdaptiveIterations(std::size_t inliers, std::size_t total,
                               std::size_t sample_size, double confidence,
                               std::size_t max_iterations) {
  if (total == 0 || inliers == 0) return max_iterations;
  const double ratio = static_cast<double>(inliers) / total;
  const double all_inlier = std::pow(ratio, static_cast<double>(sample_size));
  if (all_inlier >= 1.0) return 1;
  const double denom = std::log1p(-all_inlier);
  if (!(denom < 0.0)) return max_iterations;
  const double n = std::ceil(std::log1p(-confidence) / denom);
  if (!(n < static_cast<double>(max_iterations))) return max_iterations;
  return std::max<std::size_t>(1, static_cast<std::size_t>(n));
}

void DrawSample(Rng& rng, std::vector<std::size_t>& pool, std::size_t k,
                std::vector<std::size_t>& sample) {
  const std::size_t n = pool.size();
  sample.resize(k);
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + rng.UniformIndex(n - i);
    std::swap(pool[i], pool[j]);
    sample[i] = pool[i];
  }
}

}  // namespace mapfree

#include "mapfree/robust/scale_consensus.h"

#include <algorithm>
#include <cmath>
#include <tuple>
#include <vector>

#include "mapfree/error.h"

namespace mapfree {

double ScaleEstimate(const DepthCorrespondence& c, const Rotation& r,
                     const Eigen::Vector3d& t_hat) {
  return t_hat.dot(c.query - r * c.ref);
}

ScaleConsensus ConsensusFromEstimates(std::span<const double> estimates,
                                      const ScaleConsensusConfig& config) {
  if (!(config.relative_tolerance > 0.0)) {
    throw InvalidParameterError("relative_tolerance must be positive");
  }
  std::vector<double> sorted;
  sorted.reserve(estimates.size());
  for (const double s : estimates) {
    if (std::isfinite(s)) sorted.push_back(s);
  }
  std::sort(sorted.begin(), sorted.end());

  const double tol = config.relative_tolerance;
  const auto supports = [tol](double s, double c) {
    return std::abs(s - c) <= tol * c;
  };

  bool found = false;
  std::size_t best_count = 0;
  double best_mad = 0.0;
  double best_mean = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double c = sorted[i];
    if (!(c > 0.0) || c < config.min_component) continue;
    if (i > 0 && sorted[i - 1] == c) continue;  // same candidate as before
    // Supporters form a contiguous run of the sorted estimates around c.
    std::size_t lo = i, hi = i + 1;
    while (lo > 0 && supports(sorted[lo - 1], c)) --lo;
    while (hi < sorted.size() && supports(sorted[hi], c)) ++hi;
    const std::size_t count = hi - lo;
    double sum = 0.0;
    for (std::size_t j = lo; j < hi; ++j) sum += sorted[j];
    const double mean = sum / static_cast<double>(count);
    double dev = 0.0;
    for (std::size_t j = lo; j < hi; ++j) dev += std::abs(sorted[j] - mean);
    const double mad = dev / static_cast<double>(count);
    if (!found || std::make_tuple(-static_cast<long long>(count), mad, mean) <
                      std::make_tuple(-static_cast<long long>(best_count),
                                      best_mad, best_mean)) {
      found = true;
      best_count = count;
      best_mad = mad;
      best_mean = mean;
    }
  }
  if (!found) {
    throw ScaleFailureError("no positive scale estimate");
  }
  return {best_mean, best_count};
}

ScaleConsensus EstimateScaleConsensus(
    std::span<const DepthCorrespondence> inliers, const Rotation& r,
    const Eigen::Vector3d& t_hat, const ScaleConsensusConfig& config) {
  if (std::abs(t_hat.norm() - 1.0) > 1e-9) {
    throw InvalidParameterError("translation direction must be unit norm");
  }
  if (inliers.empty()) {
    throw ScaleFailureError("no correspondences for scale estimation");
  }
  std::vector<double> estimates;
  estimates.reserve(inliers.size());
  for (const DepthCorrespondence& c : inliers) {
    estimates.push_back(ScaleEstimate(c, r, t_hat));
  }
  return ConsensusFromEstimates(estimates, config);
}

}  // namespace mapfree

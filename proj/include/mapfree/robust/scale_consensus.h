#pragma once

#include <cstddef>
#include <span>

#include <Eigen/Core>

#include "mapfree/geometry/rotation.h"

namespace mapfree {

// Reference-camera point and query-camera point of one correspondence.
struct DepthCorrespondence {
  Eigen::Vector3d ref;
  Eigen::Vector3d query;
};

struct ScaleConsensusConfig {
  double relative_tolerance = 0.1;
  // Per-correspondence estimates below this many meters cannot be
  // candidates.
  double min_component = 1e-4;
};

struct ScaleConsensus {
  double scale = 0.0;
  std::size_t support = 0;
};

// Per-correspondence scale estimate t̂ · (X_query - R X_ref).
double ScaleEstimate(const DepthCorrespondence& c, const Rotation& r,
                     const Eigen::Vector3d& t_hat);

// Each positive estimate s_c is tried as a candidate; its supporters are
// the estimates within relative_tolerance * s_c. The winner has the most
// supporters, then the smaller mean absolute deviation about the supporter
// mean, then the smaller scale. Returns the winner's supporter mean.
// Result is independent of input order. Throws ScaleFailureError when
// there is no candidate, InvalidParameterError for a bad config or t̂.
ScaleConsensus EstimateScaleConsensus(
    std::span<const DepthCorrespondence> inliers, const Rotation& r,
    const Eigen::Vector3d& t_hat, const ScaleConsensusConfig& config = {});

// The same vote over precomputed estimates.
ScaleConsensus ConsensusFromEstimates(std::span<const double> estimates,
                                      const ScaleConsensusConfig& config = {});

}  // namespace mapfree

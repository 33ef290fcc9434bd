#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mapfree/data.h"
#include "mapfree/geometry/camera.h"
#include "mapfree/geometry/pose.h"
#include "mapfree/robust/scale_consensus.h"
#include "mapfree/solvers/pnp.h"

namespace mapfree {

enum class EstimateStatus { kOk, kNoEstimate, kDegenerateScale };

std::string_view ToString(EstimateStatus status);
// Throws InvalidParameterError for unknown names.
EstimateStatus ParseEstimateStatus(std::string_view name);

// Metric pose of the query relative to the reference.
struct PoseEstimate {
  EstimateStatus status = EstimateStatus::kNoEstimate;
  std::optional<Pose> pose;         // present iff status == kOk
  std::optional<double> confidence;  // inlier count for all estimators here
  // Robust-stage inliers, one entry per input correspondence; empty when
  // estimation stopped before the robust stage.
  std::vector<char> inlier_mask;
};

enum class EstimatorKind { kEssMatDScale, kPnP, kProcrustes };

std::string_view ToString(EstimatorKind kind);
// Accepts "essmat-dscale", "pnp" and "procrustes".
EstimatorKind ParseEstimatorKind(std::string_view name);

enum class EssentialSolver { kFivePoint, kEightPoint };

struct EstimatorConfig {
  std::size_t max_iterations = 10000;
  double confidence = 0.9999;
  std::size_t min_inliers = 5;
  std::uint64_t rng_seed = 0;
  // Overrides the per-estimator default: 4 px Sampson distance (converted
  // with the geometric-mean focal), 3 px reprojection, 0.15 m 3D distance.
  std::optional<double> inlier_threshold;

  ScaleConsensusConfig scale;
  std::size_t min_scale_inliers = 5;
  EssentialSolver essential_solver = EssentialSolver::kFivePoint;
  PnPRefineOptions refine;

  // Throws InvalidParameterError for out-of-range values.
  void Validate() const;
};

// Threshold actually used by `kind` in its own residual units.
double EffectiveInlierThreshold(EstimatorKind kind,
                                const CameraIntrinsics& k_ref,
                                const CameraIntrinsics& k_query,
                                const EstimatorConfig& config);

// Essential matrix with cheirality, then metric scale from depth consensus.
PoseEstimate EstimateEssMatDScale(const CorrespondenceSet& matches,
                                  const DepthMap& depth_ref,
                                  const DepthMap& depth_query,
                                  const CameraIntrinsics& k_ref,
                                  const CameraIntrinsics& k_query,
                                  const EstimatorConfig& config);

// Query 2D against reference-depth 3D, P3P in RANSAC plus refinement.
PoseEstimate EstimatePnP(const CorrespondenceSet& matches,
                         const DepthMap& depth_ref,
                         const CameraIntrinsics& k_ref,
                         const CameraIntrinsics& k_query,
                         const EstimatorConfig& config);

// 3D-3D rigid alignment in RANSAC with a final fit on all inliers.
PoseEstimate EstimateProcrustes(const CorrespondenceSet& matches,
                                const DepthMap& depth_ref,
                                const DepthMap& depth_query,
                                const CameraIntrinsics& k_ref,
                                const CameraIntrinsics& k_query,
                                const EstimatorConfig& config);

PoseEstimate Estimate(EstimatorKind kind, const CorrespondenceSet& matches,
                      const DepthMap& depth_ref, const DepthMap& depth_query,
                      const CameraIntrinsics& k_ref,
                      const CameraIntrinsics& k_query,
                      const EstimatorConfig& config);

}  // namespace mapfree

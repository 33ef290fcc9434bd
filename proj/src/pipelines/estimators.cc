#include "mapfree/pipelines/estimators.h"

#include <cmath>
#include <limits>

#include "mapfree/error.h"
#include "mapfree/robust/ransac.h"
#include "mapfree/robust/sampson.h"
#include "mapfree/solvers/essential.h"
#include "mapfree/solvers/procrustes.h"

namespace mapfree {
namespace {

constexpr double kSampsonThresholdPx = 4.0;
constexpr double kReprojectionThresholdPx = 3.0;
constexpr double kAlignmentThresholdM = 0.15;

RansacConfig MakeRansacConfig(const EstimatorConfig& config,
                              double threshold) {
  RansacConfig r;
  r.max_iterations = config.max_iterations;
  r.confidence = config.confidence;
  r.min_inliers = config.min_inliers;
  r.rng_seed = config.rng_seed;
  r.inlier_threshold = threshold;
  return r;
}

void CheckDepthMatches(const DepthMap& depth, const CameraIntrinsics& k,
                       const char* which) {
  if (depth.width != k.width || depth.height != k.height ||
      depth.values.size() != static_cast<std::size_t>(depth.width) *
                                 static_cast<std::size_t>(depth.height)) {
    throw InvalidParameterError(std::string(which) +
                                " depth map does not match the intrinsics");
  }
}

PoseEstimate NoEstimate() { return PoseEstimate{}; }

std::vector<char> ExpandMask(const std::vector<char>& subset_mask,
                             const std::vector<std::size_t>& subset_index,
                             std::size_t total) {
  std::vector<char> mask(total, 0);
  for (std::size_t i = 0; i < subset_index.size(); ++i) {
    mask[subset_index[i]] = subset_mask[i];
  }
  return mask;
}

}  // namespace

std::string_view ToString(EstimateStatus status) {
  switch (status) {
    case EstimateStatus::kOk:
      return "ok";
    case EstimateStatus::kNoEstimate:
      return "no_estimate";
    case EstimateStatus::kDegenerateScale:
      return "degenerate_scale";
  }
  return "no_estimate";
}

EstimateStatus ParseEstimateStatus(std::string_view name) {
  if (name == "ok") return EstimateStatus::kOk;
  if (name == "no_estimate") return EstimateStatus::kNoEstimate;
  if (name == "degenerate_scale") return EstimateStatus::kDegenerateScale;
  throw InvalidParameterError("unknown estimate status '" + std::string(name) +
                              "'");
}

std::string_view ToString(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::kEssMatDScale:
      return "essmat-dscale";
    case EstimatorKind::kPnP:
      return "pnp";
    case EstimatorKind::kProcrustes:
      return "procrustes";
  }
  return "essmat-dscale";
}

EstimatorKind ParseEstimatorKind(std::string_view name) {
  if (name == "essmat-dscale") return EstimatorKind::kEssMatDScale;
  if (name == "pnp") return EstimatorKind::kPnP;
  if (name == "procrustes") return EstimatorKind::kProcrustes;
  throw InvalidParameterError("unknown estimator '" + std::string(name) +
                              "' (expected essmat-dscale, pnp or procrustes)");
}

void EstimatorConfig::Validate() const {
  RansacConfig r = MakeRansacConfig(*this, 1.0);
  if (inlier_threshold) r.inlier_threshold = *inlier_threshold;
  r.Validate();
  if (!(scale.relative_tolerance > 0.0) ||
      !std::isfinite(scale.relative_tolerance)) {
    throw InvalidParameterError("scale tolerance must be positive");
  }
  if (!(scale.min_component >= 0.0) || !std::isfinite(scale.min_component)) {
    throw InvalidParameterError("scale min_component must be >= 0");
  }
  if (refine.max_iterations < 0) {
    throw InvalidParameterError("refine_max_iterations must be >= 0");
  }
}

double EffectiveInlierThreshold(EstimatorKind kind,
                                const CameraIntrinsics& k_ref,
                                const CameraIntrinsics& k_query,
                                const EstimatorConfig& config) {
  if (config.inlier_threshold) return *config.inlier_threshold;
  switch (kind) {
    case EstimatorKind::kEssMatDScale: {
      const double f = std::pow(k_ref.fx * k_ref.fy * k_query.fx * k_query.fy,
                                0.25);
      return kSampsonThresholdPx / f;
    }
    case EstimatorKind::kPnP:
      return kReprojectionThresholdPx;
    case EstimatorKind::kProcrustes:
      return kAlignmentThresholdM;
  }
  return kAlignmentThresholdM;
}

PoseEstimate EstimateEssMatDScale(const CorrespondenceSet& matches,
                                  const DepthMap& depth_ref,
                                  const DepthMap& depth_query,
                                  const CameraIntrinsics& k_ref,
                                  const CameraIntrinsics& k_query,
                                  const EstimatorConfig& config) {
  CheckDepthMatches(depth_ref, k_ref, "reference");
  CheckDepthMatches(depth_query, k_query, "query");
  const std::size_t sample_size =
      config.essential_solver == EssentialSolver::kFivePoint ? 5 : 8;
  if (matches.size() < sample_size) return NoEstimate();

  std::vector<NormalizedMatch> normalized;
  normalized.reserve(matches.size());
  for (const Correspondence& c : matches) {
    normalized.push_back({k_ref.Normalize(c.ref_px),
                          k_query.Normalize(c.query_px)});
  }

  const auto solve = [&](const std::vector<std::size_t>& idx) {
    std::vector<NormalizedMatch> sample;
    sample.reserve(idx.size());
    for (const std::size_t i : idx) sample.push_back(normalized[i]);
    if (config.essential_solver == EssentialSolver::kFivePoint) {
      return EssentialFivePoint(sample);
    }
    try {
      return std::vector<EssentialMatrix>{EssentialEightPoint(sample)};
    } catch (const DegenerateSampleError&) {
      return std::vector<EssentialMatrix>{};
    }
  };
  const auto residual = [&](const EssentialMatrix& e, std::size_t i) {
    return SampsonError(e, normalized[i]);
  };

  const double threshold = EffectiveInlierThreshold(
      EstimatorKind::kEssMatDScale, k_ref, k_query, config);
  RobustResult<EssentialMatrix> robust;
  try {
    robust = Ransac<EssentialMatrix>(
        normalized.size(), sample_size, solve, residual,
        MakeRansacConfig(config, threshold),
        [&](const EssentialMatrix& e, const std::vector<std::size_t>& idx) {
          std::vector<NormalizedMatch> inl;
          inl.reserve(idx.size());
          for (const std::size_t i : idx) inl.push_back(normalized[i]);
          return std::vector<EssentialMatrix>{RefineEssentialSampson(e, inl)};
        });
  } catch (const NoConsensusError&) {
    return NoEstimate();
  }

  PoseEstimate estimate;
  estimate.inlier_mask = robust.inlier_mask;
  std::vector<NormalizedMatch> inliers;
  std::vector<std::size_t> inlier_index;
  for (std::size_t i = 0; i < normalized.size(); ++i) {
    if (robust.inlier_mask[i]) {
      inliers.push_back(normalized[i]);
      inlier_index.push_back(i);
    }
  }

  RelativeMotion motion;
  try {
    motion = DecomposeEssential(robust.model, inliers);
  } catch (const Error&) {
    estimate.status = EstimateStatus::kNoEstimate;
    return estimate;
  }

  std::vector<DepthCorrespondence> scaled;
  for (const std::size_t i : inlier_index) {
    const std::optional<double> dr = depth_ref.Sample(matches[i].ref_px);
    const std::optional<double> dq = depth_query.Sample(matches[i].query_px);
    if (!dr || !dq) continue;
    scaled.push_back({Backproject(k_ref, matches[i].ref_px, *dr),
                      Backproject(k_query, matches[i].query_px, *dq)});
  }
  if (scaled.size() < config.min_scale_inliers) {
    estimate.status = EstimateStatus::kDegenerateScale;
    return estimate;
  }
  ScaleConsensus consensus;
  try {
    consensus = EstimateScaleConsensus(scaled, motion.rotation,
                                       motion.direction, config.scale);
  } catch (const ScaleFailureError&) {
    estimate.status = EstimateStatus::kDegenerateScale;
    return estimate;
  }

  estimate.status = EstimateStatus::kOk;
  estimate.pose = motion.ToPose(consensus.scale);
  estimate.confidence = static_cast<double>(robust.inlier_count);
  return estimate;
}

PoseEstimate EstimatePnP(const CorrespondenceSet& matches,
                         const DepthMap& depth_ref,
                         const CameraIntrinsics& k_ref,
                         const CameraIntrinsics& k_query,
                         const EstimatorConfig& config) {
  CheckDepthMatches(depth_ref, k_ref, "reference");
  std::vector<PixelPoint> pixels;
  std::vector<BearingPoint> bearings;
  std::vector<std::size_t> index;
  for (std::size_t i = 0; i < matches.size(); ++i) {
    const std::optional<double> d = depth_ref.Sample(matches[i].ref_px);
    if (!d) continue;
    const Eigen::Vector3d point = Backproject(k_ref, matches[i].ref_px, *d);
    pixels.push_back({matches[i].query_px, point});
    bearings.push_back({k_query.Normalize(matches[i].query_px), point});
    index.push_back(i);
  }
  if (pixels.size() < 4) return NoEstimate();

  const auto solve = [&](const std::vector<std::size_t>& idx) {
    const std::array<BearingPoint, 3> sample = {bearings[idx[0]],
                                                bearings[idx[1]],
                                                bearings[idx[2]]};
    try {
      return SolveP3P(sample);
    } catch (const DegenerateSampleError&) {
      return std::vector<Pose>{};
    }
  };
  const auto residual = [&](const Pose& pose, std::size_t i) {
    const Eigen::Vector3d x = pose.Apply(pixels[i].point);
    if (!(x.z() > 0.0)) return std::numeric_limits<double>::infinity();
    return (Project(k_query, x) - pixels[i].pixel).norm();
  };

  const double threshold =
      EffectiveInlierThreshold(EstimatorKind::kPnP, k_ref, k_query, config);
  RobustResult<Pose> robust;
  try {
    robust = Ransac<Pose>(
        pixels.size(), 3, solve, residual, MakeRansacConfig(config, threshold),
        [&](const Pose& model, const std::vector<std::size_t>& idx) {
          std::vector<PixelPoint> inl;
          inl.reserve(idx.size());
          for (const std::size_t i : idx) inl.push_back(pixels[i]);
          if (inl.size() < 4) return std::vector<Pose>{};
          const PnPRefinement r = RefinePnP(model, inl, k_query, config.refine);
          if (r.diverged) return std::vector<Pose>{};
          return std::vector<Pose>{r.pose};
        });
  } catch (const NoConsensusError&) {
    return NoEstimate();
  }

  Pose pose = robust.model;
  std::vector<PixelPoint> inliers;
  for (std::size_t i = 0; i < pixels.size(); ++i) {
    if (robust.inlier_mask[i]) inliers.push_back(pixels[i]);
  }
  if (inliers.size() >= 4) {
    const PnPRefinement refined =
        RefinePnP(robust.model, inliers, k_query, config.refine);
    if (!refined.diverged) pose = refined.pose;
  }

  PoseEstimate estimate;
  estimate.status = EstimateStatus::kOk;
  estimate.pose = pose;
  estimate.confidence = static_cast<double>(robust.inlier_count);
  estimate.inlier_mask = ExpandMask(robust.inlier_mask, index, matches.size());
  return estimate;
}

PoseEstimate EstimateProcrustes(const CorrespondenceSet& matches,
                                const DepthMap& depth_ref,
                                const DepthMap& depth_query,
                                const CameraIntrinsics& k_ref,
                                const CameraIntrinsics& k_query,
                                const EstimatorConfig& config) {
  CheckDepthMatches(depth_ref, k_ref, "reference");
  CheckDepthMatches(depth_query, k_query, "query");
  std::vector<PointPair> pairs;
  std::vector<std::size_t> index;
  for (std::size_t i = 0; i < matches.size(); ++i) {
    const std::optional<double> dr = depth_ref.Sample(matches[i].ref_px);
    const std::optional<double> dq = depth_query.Sample(matches[i].query_px);
    if (!dr || !dq) continue;
    pairs.push_back({Backproject(k_ref, matches[i].ref_px, *dr),
                     Backproject(k_query, matches[i].query_px, *dq)});
    index.push_back(i);
  }
  if (pairs.size() < 3) return NoEstimate();

  const auto solve = [&](const std::vector<std::size_t>& idx) {
    const std::array<PointPair, 3> sample = {pairs[idx[0]], pairs[idx[1]],
                                             pairs[idx[2]]};
    try {
      return std::vector<Pose>{ProcrustesAlign(sample)};
    } catch (const DegenerateSampleError&) {
      return std::vector<Pose>{};
    }
  };
  const auto residual = [&](const Pose& pose, std::size_t i) {
    return (pose.Apply(pairs[i].source) - pairs[i].target).norm();
  };

  const double threshold = EffectiveInlierThreshold(
      EstimatorKind::kProcrustes, k_ref, k_query, config);
  RobustResult<Pose> robust;
  try {
    robust = Ransac<Pose>(pairs.size(), 3, solve, residual,
                          MakeRansacConfig(config, threshold));
  } catch (const NoConsensusError&) {
    return NoEstimate();
  }

  std::vector<PointPair> inliers;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (robust.inlier_mask[i]) inliers.push_back(pairs[i]);
  }
  Pose pose = robust.model;
  try {
    pose = ProcrustesAlign(inliers);
  } catch (const DegenerateSampleError&) {
  }

  PoseEstimate estimate;
  estimate.status = EstimateStatus::kOk;
  estimate.pose = pose;
  estimate.confidence = static_cast<double>(robust.inlier_count);
  estimate.inlier_mask = ExpandMask(robust.inlier_mask, index, matches.size());
  return estimate;
}

PoseEstimate Estimate(EstimatorKind kind, const CorrespondenceSet& matches,
                      const DepthMap& depth_ref, const DepthMap& depth_query,
                      const CameraIntrinsics& k_ref,
                      const CameraIntrinsics& k_query,
                      const EstimatorConfig& config) {
  switch (kind) {
    case EstimatorKind::kEssMatDScale:
      return EstimateEssMatDScale(matches, depth_ref, depth_query, k_ref,
                                  k_query, config);
    case EstimatorKind::kPnP:
      return EstimatePnP(matches, depth_ref, k_ref, k_query, config);
    case EstimatorKind::kProcrustes:
      return EstimateProcrustes(matches, depth_ref, depth_query, k_ref,
                                k_query, config);
  }
  return NoEstimate();
}

}  // namespace mapfree

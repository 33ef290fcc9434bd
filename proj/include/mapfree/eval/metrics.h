#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "mapfree/geometry/camera.h"
#include "mapfree/geometry/pose.h"
#include "mapfree/pipelines/estimators.h"

namespace mapfree {

// Lattice of virtual points in the query camera frame. Centered laterally
// and vertically on the optical axis; the nearest depth plane sits at
// `offset` meters.
struct VirtualGrid {
  int height = 4;
  int width = 7;
  int depth = 7;
  double spacing = 0.30;
  double offset = 1.8;

  // Throws InvalidParameterError for non-positive counts or spacing.
  void Validate() const;
};

std::vector<Eigen::Vector3d> BuildVirtualGrid(const VirtualGrid& grid = {});

// Mean pixel distance between π(v) and π(T T_gt⁻¹ v) over the grid. Each
// per-point error is capped at the image diagonal, which is also the value
// used when the transformed point falls behind the camera.
double Vcre(const Pose& estimate, const Pose& ground_truth,
            const CameraIntrinsics& k_query, const VirtualGrid& grid = {});

struct Thresholds {
  std::vector<double> vcre_fractions = {0.05, 0.10};  // of image diagonal
  double rotation_deg = 5.0;
  double translation_m = 0.25;

  void Validate() const;
};

struct EvaluationRecord {
  std::string scene_id;
  std::string query_id;
  EstimateStatus status = EstimateStatus::kNoEstimate;
  std::optional<double> confidence;
  // Present iff status == kOk.
  std::optional<double> rotation_error_deg;
  std::optional<double> translation_error_m;
  std::optional<double> vcre_px;
  double image_diagonal_px = 0.0;
};

EvaluationRecord ScoreQuery(const std::string& scene_id,
                            const std::string& query_id,
                            const PoseEstimate& estimate,
                            const Pose& ground_truth,
                            const CameraIntrinsics& k_query,
                            const VirtualGrid& grid = {});

// What makes a non-rejected estimate acceptable.
struct AcceptanceCriterion {
  enum class Kind { kPose, kVcre };
  Kind kind = Kind::kVcre;
  double vcre_fraction = 0.10;
  double rotation_deg = 5.0;
  double translation_m = 0.25;

  static AcceptanceCriterion ForPose(double rotation_deg, double translation_m);
  static AcceptanceCriterion ForVcre(double fraction_of_diagonal);
  // "pose" or "vcre-<fraction>", e.g. "vcre-0.1".
  static AcceptanceCriterion Parse(const std::string& name);

  // Strict comparisons; records with status != kOk are never accepted.
  bool Accepts(const EvaluationRecord& r) const;
  std::string Name() const;
};

struct CurvePoint {
  double confidence_threshold = 0.0;  // -inf keeps every ok record
  double estimate_ratio = 0.0;
  std::optional<double> precision;  // empty when everything is rejected
};

// Sweeps -inf and every distinct confidence of ok records, ascending (so
// estimate_ratio is non-increasing). A record survives threshold τ when it
// is ok and its confidence is >= τ; records without confidence survive only
// the -inf threshold. Empty input gives an empty curve.
std::vector<CurvePoint> PrecisionCurve(std::span<const EvaluationRecord> records,
                                       const AcceptanceCriterion& acceptance);

// Trapezoidal area under precision over estimate_ratio, with the curve held
// flat from its smallest ratio down to zero.
double CurveAuc(std::span<const CurvePoint> curve);

// Lower-middle element for even counts; nullopt for empty input.
std::optional<double> LowerMedian(std::vector<double> values);

}  // namespace mapfree

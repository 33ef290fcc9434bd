#include "mapfree/eval/metrics.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>

#include "mapfree/error.h"

namespace mapfree {

void VirtualGrid::Validate() const {
  if (height < 1 || width < 1 || depth < 1) {
    throw InvalidParameterError("virtual grid counts must be positive");
  }
  if (!(spacing > 0.0) || !std::isfinite(spacing)) {
    throw InvalidParameterError("virtual grid spacing must be positive");
  }
  if (!(offset > 0.0) || !std::isfinite(offset)) {
    throw InvalidParameterError("virtual grid offset must be positive");
  }
}

std::vector<Eigen::Vector3d> BuildVirtualGrid(const VirtualGrid& grid) {
  grid.Validate();
  std::vector<Eigen::Vector3d> points;
  points.reserve(static_cast<std::size_t>(grid.height) * grid.width *
                 grid.depth);
  const double x0 = -0.5 * (grid.width - 1) * grid.spacing;
  const double y0 = -0.5 * (grid.height - 1) * grid.spacing;
  for (int k = 0; k < grid.depth; ++k) {
    for (int j = 0; j < grid.height; ++j) {
      for (int i = 0; i < grid.width; ++i) {
        points.emplace_back(x0 + i * grid.spacing, y0 + j * grid.spacing,
                            grid.offset + k * grid.spacing);
      }
    }
  }
  return points;
}

double Vcre(const Pose& estimate, const Pose& ground_truth,
            const CameraIntrinsics& k_query, const VirtualGrid& grid) {
  const Pose delta = Compose(estimate, Inverse(ground_truth));
  const double cap = k_query.Diagonal();
  const std::vector<Eigen::Vector3d> points = BuildVirtualGrid(grid);
  double sum = 0.0;
  for (const Eigen::Vector3d& v : points) {
    const Eigen::Vector3d moved = delta.Apply(v);
    double err = cap;
    if (moved.z() > 0.0) {
      err = std::min(cap, (Project(k_query, v) - Project(k_query, moved)).norm());
    }
    sum += err;
  }
  return sum / static_cast<double>(points.size());
}

void Thresholds::Validate() const {
  for (const double f : vcre_fractions) {
    if (!(f > 0.0)) {
      throw InvalidParameterError("VCRE thresholds must be positive");
    }
  }
  if (!(rotation_deg > 0.0) || !(translation_m > 0.0)) {
    throw InvalidParameterError("pose thresholds must be positive");
  }
}

EvaluationRecord ScoreQuery(const std::string& scene_id,
                            const std::string& query_id,
                            const PoseEstimate& estimate,
                            const Pose& ground_truth,
                            const CameraIntrinsics& k_query,
                            const VirtualGrid& grid) {
  EvaluationRecord r;
  r.scene_id = scene_id;
  r.query_id = query_id;
  r.status = estimate.status;
  r.confidence = estimate.confidence;
  r.image_diagonal_px = k_query.Diagonal();
  if (estimate.status == EstimateStatus::kOk && estimate.pose) {
    r.rotation_error_deg =
        RotationErrorDeg(estimate.pose->rotation, ground_truth.rotation);
    r.translation_error_m = TranslationErrorM(*estimate.pose, ground_truth);
    r.vcre_px = Vcre(*estimate.pose, ground_truth, k_query, grid);
  } else if (r.status == EstimateStatus::kOk) {
    r.status = EstimateStatus::kNoEstimate;
  }
  return r;
}

AcceptanceCriterion AcceptanceCriterion::ForPose(double rotation_deg,
                                                 double translation_m) {
  AcceptanceCriterion c;
  c.kind = Kind::kPose;
  c.rotation_deg = rotation_deg;
  c.translation_m = translation_m;
  return c;
}

AcceptanceCriterion AcceptanceCriterion::ForVcre(double fraction) {
  AcceptanceCriterion c;
  c.kind = Kind::kVcre;
  c.vcre_fraction = fraction;
  return c;
}

AcceptanceCriterion AcceptanceCriterion::Parse(const std::string& name) {
  if (name == "pose") return ForPose(5.0, 0.25);
  const std::string prefix = "vcre-";
  if (name.rfind(prefix, 0) == 0) {
    const std::string num = name.substr(prefix.size());
    char* end = nullptr;
    const double f = std::strtod(num.c_str(), &end);
    if (!num.empty() && end == num.c_str() + num.size() && f > 0.0) {
      return ForVcre(f);
    }
  }
  throw InvalidParameterError("unknown acceptance criterion '" + name +
                              "' (expected pose or vcre-<fraction>)");
}

bool AcceptanceCriterion::Accepts(const EvaluationRecord& r) const {
  if (r.status != EstimateStatus::kOk) return false;
  if (kind == Kind::kPose) {
    return r.rotation_error_deg && r.translation_error_m &&
           *r.rotation_error_deg < rotation_deg &&
           *r.translation_error_m < translation_m;
  }
  return r.vcre_px && *r.vcre_px < vcre_fraction * r.image_diagonal_px;
}

std::string AcceptanceCriterion::Name() const {
  char buf[96];
  if (kind == Kind::kPose) {
    std::snprintf(buf, sizeof(buf), "pose(%gm,%gdeg)", translation_m,
                  rotation_deg);
  } else {
    std::snprintf(buf, sizeof(buf), "vcre(%g*diag)", vcre_fraction);
  }
  return buf;
}

std::vector<CurvePoint> PrecisionCurve(std::span<const EvaluationRecord> records,
                                       const AcceptanceCriterion& acceptance) {
  if (records.empty()) return {};
  std::vector<double> thresholds = {-std::numeric_limits<double>::infinity()};
  for (const EvaluationRecord& r : records) {
    if (r.status == EstimateStatus::kOk && r.confidence) {
      thresholds.push_back(*r.confidence);
    }
  }
  std::sort(thresholds.begin(), thresholds.end());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()),
                   thresholds.end());

  std::vector<CurvePoint> curve;
  curve.reserve(thresholds.size());
  const double total = static_cast<double>(records.size());
  for (const double tau : thresholds) {
    std::size_t kept = 0, good = 0;
    for (const EvaluationRecord& r : records) {
      if (r.status != EstimateStatus::kOk) continue;
      const bool survives =
          std::isinf(tau) || (r.confidence && *r.confidence >= tau);
      if (!survives) continue;
      ++kept;
      good += acceptance.Accepts(r);
    }
    CurvePoint p;
    p.confidence_threshold = tau;
    p.estimate_ratio = total > 0 ? kept / total : 0.0;
    if (kept > 0) p.precision = static_cast<double>(good) / kept;
    curve.push_back(p);
  }
  return curve;
}

double CurveAuc(std::span<const CurvePoint> curve) {
  std::vector<std::pair<double, double>> pts;
  for (const CurvePoint& p : curve) {
    if (p.precision) pts.emplace_back(p.estimate_ratio, *p.precision);
  }
  if (pts.empty()) return 0.0;
  std::sort(pts.begin(), pts.end());
  double area = pts.front().first * pts.front().second;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    area += 0.5 * (pts[i].first - pts[i - 1].first) *
            (pts[i].second + pts[i - 1].second);
  }
  return area;
}

std::optional<double> LowerMedian(std::vector<double> values) {
  if (values.empty()) return std::nullopt;
  std::sort(values.begin(), values.end());
  return values[(values.size() - 1) / 2];
}

}  // namespace mapfree

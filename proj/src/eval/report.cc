#include "mapfree/eval/report.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

namespace mapfree {
namespace {

nlohmann::json OptionalJson(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

std::string FormatDouble(double v) {
  if (std::isinf(v)) return v < 0 ? "-inf" : "inf";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string FormatOptional(const std::optional<double>& v) {
  return v ? FormatDouble(*v) : std::string();
}

}  // namespace

std::vector<AcceptanceCriterion> ReportCriteria(const Thresholds& thresholds) {
  std::vector<AcceptanceCriterion> criteria;
  for (const double f : thresholds.vcre_fractions) {
    criteria.push_back(AcceptanceCriterion::ForVcre(f));
  }
  criteria.push_back(AcceptanceCriterion::ForPose(thresholds.rotation_deg,
                                                  thresholds.translation_m));
  return criteria;
}

Report AggregateReport(std::span<const EvaluationRecord> records,
                       const ReportMeta& meta) {
  meta.thresholds.Validate();
  std::vector<EvaluationRecord> sorted(records.begin(), records.end());
  std::sort(sorted.begin(), sorted.end(),
            [](const EvaluationRecord& a, const EvaluationRecord& b) {
              return std::tie(a.scene_id, a.query_id) <
                     std::tie(b.scene_id, b.query_id);
            });

  Report report;
  report.meta = meta;
  report.num_records = sorted.size();

  std::map<std::string, std::vector<const EvaluationRecord*>> by_scene;
  for (const EvaluationRecord& r : sorted) by_scene[r.scene_id].push_back(&r);
  for (const auto& [scene, recs] : by_scene) {
    SceneSummary s;
    s.scene_id = scene;
    s.num_queries = recs.size();
    std::vector<double> rot, trans, vcre;
    for (const EvaluationRecord* r : recs) {
      if (r->status != EstimateStatus::kOk) continue;
      ++s.num_ok;
      rot.push_back(*r->rotation_error_deg);
      trans.push_back(*r->translation_error_m);
      vcre.push_back(*r->vcre_px);
    }
    s.median_rotation_error_deg = LowerMedian(rot);
    s.median_translation_error_m = LowerMedian(trans);
    s.median_vcre_px = LowerMedian(vcre);
    report.per_scene.push_back(std::move(s));
  }

  for (const AcceptanceCriterion& c : ReportCriteria(meta.thresholds)) {
    AcceptanceRate rate;
    rate.name = c.Name();
    rate.total = sorted.size();
    for (const EvaluationRecord& r : sorted) rate.accepted += c.Accepts(r);
    rate.rate = rate.total > 0
                    ? static_cast<double>(rate.accepted) / rate.total
                    : 0.0;
    report.acceptance.push_back(rate);

    NamedCurve curve;
    curve.name = c.Name();
    curve.points = PrecisionCurve(sorted, c);
    curve.auc = CurveAuc(curve.points);
    report.curves.push_back(std::move(curve));
  }

  std::vector<double> vcre;
  for (const EvaluationRecord& r : sorted) {
    if (r.status == EstimateStatus::kOk) vcre.push_back(*r.vcre_px);
  }
  std::sort(vcre.begin(), vcre.end());
  for (std::size_t i = 0; i < vcre.size(); ++i) {
    report.cdf.push_back(
        {vcre[i], static_cast<double>(i + 1) / static_cast<double>(sorted.size())});
  }
  return report;
}

nlohmann::json ToJson(const Report& report) {
  using nlohmann::json;
  const ReportMeta& m = report.meta;
  json out;
  out["schema"] = kReportSchema;
  out["meta"] = {
      {"grid",
       {{"height", m.grid.height},
        {"width", m.grid.width},
        {"depth", m.grid.depth},
        {"spacing_m", m.grid.spacing},
        {"offset_m", m.grid.offset},
        {"anchoring", "centered-xy-nearest-plane-at-offset"},
        {"behind_camera", "cap-at-diagonal"}}},
      {"thresholds",
       {{"vcre_fractions", m.thresholds.vcre_fractions},
        {"rotation_deg", m.thresholds.rotation_deg},
        {"translation_m", m.thresholds.translation_m}}},
      {"seed", m.seed},
      {"estimator", m.estimator}};
  out["num_records"] = report.num_records;

  json scenes = json::array();
  for (const SceneSummary& s : report.per_scene) {
    scenes.push_back({{"scene_id", s.scene_id},
                      {"num_queries", s.num_queries},
                      {"num_ok", s.num_ok},
                      {"median_rotation_error_deg",
                       OptionalJson(s.median_rotation_error_deg)},
                      {"median_translation_error_m",
                       OptionalJson(s.median_translation_error_m)},
                      {"median_vcre_px", OptionalJson(s.median_vcre_px)}});
  }
  out["per_scene"] = std::move(scenes);

  json acceptance = json::array();
  for (const AcceptanceRate& a : report.acceptance) {
    acceptance.push_back({{"name", a.name},
                          {"accepted", a.accepted},
                          {"total", a.total},
                          {"rate", a.rate}});
  }
  out["acceptance"] = std::move(acceptance);

  json curves = json::array();
  for (const NamedCurve& c : report.curves) {
    json points = json::array();
    for (const CurvePoint& p : c.points) {
      points.push_back(
          {{"threshold", std::isinf(p.confidence_threshold)
                             ? json(nullptr)
                             : json(p.confidence_threshold)},
           {"ratio", p.estimate_ratio},
           {"precision", OptionalJson(p.precision)}});
    }
    curves.push_back(
        {{"name", c.name}, {"auc", c.auc}, {"points", std::move(points)}});
  }
  out["curves"] = std::move(curves);

  json cdf = json::array();
  for (const CdfSample& s : report.cdf) {
    cdf.push_back({{"vcre_px", s.vcre_px}, {"fraction", s.fraction}});
  }
  out["cdf"] = std::move(cdf);
  return out;
}

std::string CurveCsv(std::span<const CurvePoint> curve) {
  std::vector<CurvePoint> rows(curve.begin(), curve.end());
  std::stable_sort(rows.begin(), rows.end(),
                   [](const CurvePoint& a, const CurvePoint& b) {
                     return a.estimate_ratio > b.estimate_ratio;
                   });
  std::ostringstream out;
  out << "threshold,ratio,precision\n";
  for (const CurvePoint& p : rows) {
    out << FormatDouble(p.confidence_threshold) << ','
        << FormatDouble(p.estimate_ratio) << ',' << FormatOptional(p.precision)
        << '\n';
  }
  return out.str();
}

std::string RecordsCsv(std::span<const EvaluationRecord> records) {
  std::ostringstream out;
  out << "scene_id,query_id,status,confidence,rotation_error_deg,"
         "translation_error_m,vcre_px,image_diagonal_px\n";
  for (const EvaluationRecord& r : records) {
    out << r.scene_id << ',' << r.query_id << ',' << ToString(r.status) << ','
        << FormatOptional(r.confidence) << ','
        << FormatOptional(r.rotation_error_deg) << ','
        << FormatOptional(r.translation_error_m) << ','
        << FormatOptional(r.vcre_px) << ','
        << FormatDouble(r.image_diagonal_px) << '\n';
  }
  return out.str();
}

}  // namespace mapfree

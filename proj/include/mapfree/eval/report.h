#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mapfree/eval/metrics.h"

namespace mapfree {

inline constexpr const char* kReportSchema = "mapfree-report/1";

struct SceneSummary {
  std::string scene_id;
  std::size_t num_queries = 0;
  std::size_t num_ok = 0;
  std::optional<double> median_rotation_error_deg;
  std::optional<double> median_translation_error_m;
  std::optional<double> median_vcre_px;
};

struct AcceptanceRate {
  std::string name;
  std::size_t accepted = 0;
  std::size_t total = 0;
  double rate = 0.0;
};

struct NamedCurve {
  std::string name;
  std::vector<CurvePoint> points;
  double auc = 0.0;
};

struct CdfSample {
  double vcre_px = 0.0;
  double fraction = 0.0;
};

struct ReportMeta {
  VirtualGrid grid;
  Thresholds thresholds;
  std::uint64_t seed = 0;
  std::string estimator;
};

struct Report {
  ReportMeta meta;
  std::size_t num_records = 0;
  std::vector<SceneSummary> per_scene;  // sorted by scene_id
  std::vector<AcceptanceRate> acceptance;
  std::vector<NamedCurve> curves;
  // Sorted ok VCRE values; fraction is rank over all records, so rejected
  // queries keep the CDF below one.
  std::vector<CdfSample> cdf;
};

// Acceptance criteria evaluated by reports: one VCRE criterion per
// threshold fraction, then the pose criterion.
std::vector<AcceptanceCriterion> ReportCriteria(const Thresholds& thresholds);

Report AggregateReport(std::span<const EvaluationRecord> records,
                       const ReportMeta& meta);

nlohmann::json ToJson(const Report& report);

// threshold,ratio,precision rows sorted by descending ratio. Empty
// precision is written as an empty field, -inf threshold as "-inf".
std::string CurveCsv(std::span<const CurvePoint> curve);

// Per-record CSV for plotting.
std::string RecordsCsv(std::span<const EvaluationRecord> records);

}  // namespace mapfree

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mapfree/error.h"
#include "mapfree/eval/metrics.h"
#include "mapfree/io/formats.h"
#include "mapfree/pipelines/estimators.h"

namespace mapfree {

// Estimate lines without ground truth in the dataset.
class MismatchError : public Error {
 public:
  using Error::Error;
};

inline constexpr std::uint64_t kDefaultSeed = 20220315;

struct RunConfig {
  std::filesystem::path dataset;
  std::vector<std::string> scenes;  // empty means every scene
  EstimatorKind estimator = EstimatorKind::kEssMatDScale;
  EstimatorConfig estimator_config;
  std::uint64_t seed = kDefaultSeed;
  Thresholds thresholds;
  VirtualGrid grid;
  // 0 picks MFP_THREADS, falling back to the hardware concurrency.
  std::size_t threads = 0;
};

// Overrides from a key-value config file. Unknown keys and bad values throw
// InvalidParameterError.
void ApplyConfig(const std::map<std::string, std::string>& values,
                 RunConfig& run);

// Worker count for `requested`, honoring the MFP_THREADS cap.
std::size_t ResolveThreads(std::size_t requested);

// One line per query in scene/query order. Loader errors propagate;
// estimator failures become non-ok statuses.
std::vector<EstimateLine> RunEstimates(const RunConfig& run);

// Scores estimate lines against the dataset's ground truth. Throws
// MismatchError listing every line whose scene or query has none.
std::vector<EvaluationRecord> ScoreEstimates(
    const std::vector<EstimateLine>& lines,
    const std::filesystem::path& dataset, const VirtualGrid& grid = {});

// Entry point of the `mapfree` tool. Returns the process exit code:
// 0 success, 1 usage, 2 I/O or format error, 3 evaluation mismatch.
int RunCli(int argc, const char* const* argv);

}  // namespace mapfree

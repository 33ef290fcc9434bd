#include "mapfree/cli/commands.h"

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <iostream>
#include <set>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "mapfree/eval/report.h"
#include "mapfree/io/scene.h"
#include "mapfree/io/synthetic.h"
#include "mapfree/random.h"

namespace mapfree {
namespace {

std::vector<std::string> SplitList(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  for (char ch : s + ",") {
    if (ch == ',' || ch == ' ' || ch == '\t') {
      if (!item.empty()) out.push_back(item);
      item.clear();
    } else {
      item += ch;
    }
  }
  return out;
}

template <typename T>
T ParseValue(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  T out{};
  try {
    if constexpr (std::is_same_v<T, double>) {
      out = std::stod(value, &used);
    } else if constexpr (std::is_same_v<T, int>) {
      out = std::stoi(value, &used);
    } else {
      if (!value.empty() && value[0] == '-') throw std::invalid_argument("");
      out = static_cast<T>(std::stoull(value, &used));
    }
  } catch (const std::logic_error&) {
    used = 0;
  }
  if (used == 0 || used != value.size()) {
    throw InvalidParameterError("invalid value for '" + key + "': " + value);
  }
  return out;
}

EssentialSolver ParseSolver(const std::string& name) {
  if (name == "five-point") return EssentialSolver::kFivePoint;
  if (name == "eight-point") return EssentialSolver::kEightPoint;
  throw InvalidParameterError("unknown essential solver '" + name +
                              "' (expected five-point or eight-point)");
}

std::string Percent(double rate) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f%%", 100.0 * rate);
  return buf;
}

void WriteOutput(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
    std::cout.flush();
  } else {
    WriteFile(path, content);
  }
}

struct Task {
  const SceneManifest* scene;
  std::string query;
};

}  // namespace

void ApplyConfig(const std::map<std::string, std::string>& values,
                 RunConfig& run) {
  EstimatorConfig& e = run.estimator_config;
  for (const auto& [key, value] : values) {
    if (key == "dataset") {
      run.dataset = value;
    } else if (key == "scenes") {
      run.scenes = SplitList(value);
    } else if (key == "estimator") {
      run.estimator = ParseEstimatorKind(value);
    } else if (key == "seed") {
      run.seed = ParseValue<std::uint64_t>(key, value);
    } else if (key == "threads") {
      run.threads = ParseValue<std::size_t>(key, value);
    } else if (key == "max_iterations") {
      e.max_iterations = ParseValue<std::size_t>(key, value);
    } else if (key == "confidence") {
      e.confidence = ParseValue<double>(key, value);
    } else if (key == "min_inliers") {
      e.min_inliers = ParseValue<std::size_t>(key, value);
    } else if (key == "inlier_threshold") {
      e.inlier_threshold = ParseValue<double>(key, value);
    } else if (key == "scale_tolerance") {
      e.scale.relative_tolerance = ParseValue<double>(key, value);
    } else if (key == "scale_min_component") {
      e.scale.min_component = ParseValue<double>(key, value);
    } else if (key == "min_scale_inliers") {
      e.min_scale_inliers = ParseValue<std::size_t>(key, value);
    } else if (key == "essential_solver") {
      e.essential_solver = ParseSolver(value);
    } else if (key == "refine_max_iterations") {
      e.refine.max_iterations = ParseValue<int>(key, value);
    } else if (key == "threshold_vcre") {
      run.thresholds.vcre_fractions.clear();
      for (const std::string& f : SplitList(value)) {
        run.thresholds.vcre_fractions.push_back(ParseValue<double>(key, f));
      }
    } else if (key == "threshold_rotation_deg") {
      run.thresholds.rotation_deg = ParseValue<double>(key, value);
    } else if (key == "threshold_translation_m") {
      run.thresholds.translation_m = ParseValue<double>(key, value);
    } else if (key == "grid_height") {
      run.grid.height = ParseValue<int>(key, value);
    } else if (key == "grid_width") {
      run.grid.width = ParseValue<int>(key, value);
    } else if (key == "grid_depth") {
      run.grid.depth = ParseValue<int>(key, value);
    } else if (key == "grid_spacing") {
      run.grid.spacing = ParseValue<double>(key, value);
    } else if (key == "grid_offset") {
      run.grid.offset = ParseValue<double>(key, value);
    } else {
      throw InvalidParameterError("unknown config key '" + key + "'");
    }
  }
  e.Validate();
  run.thresholds.Validate();
  run.grid.Validate();
}

std::size_t ResolveThreads(std::size_t requested) {
  std::size_t n = requested;
  if (n == 0) n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("MFP_THREADS"); env && *env) {
    const std::size_t cap = ParseValue<std::size_t>("MFP_THREADS", env);
    if (cap == 0) throw InvalidParameterError("MFP_THREADS must be positive");
    n = std::min(n, cap);
  }
  return n;
}

std::vector<EstimateLine> RunEstimates(const RunConfig& run) {
  run.estimator_config.Validate();
  std::vector<std::string> ids = run.scenes;
  if (ids.empty()) {
    if (!std::filesystem::is_directory(run.dataset)) {
      throw IoError("dataset directory not found: " + run.dataset.string());
    }
    ids = ListScenes(run.dataset);
  }
  std::vector<SceneManifest> scenes;
  scenes.reserve(ids.size());
  for (const std::string& id : ids) scenes.push_back(LoadScene(run.dataset, id));

  std::vector<Task> tasks;
  for (const SceneManifest& s : scenes) {
    for (const std::string& q : s.queries) tasks.push_back({&s, q});
  }

  std::vector<EstimateLine> lines(tasks.size());
  std::vector<std::exception_ptr> errors(tasks.size());
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++) {
      const Task& task = tasks[i];
      try {
        const QueryInputs in = LoadQueryInputs(*task.scene, task.query);
        EstimatorConfig cfg = run.estimator_config;
        cfg.rng_seed = DeriveSeed(run.seed, task.scene->scene_id, task.query);
        PoseEstimate estimate;
        try {
          estimate = Estimate(run.estimator, in.matches, in.depth_ref,
                              in.depth_query, in.k_ref, in.k_query, cfg);
        } catch (const InvalidParameterError&) {
          throw;
        } catch (const Error&) {
          // Solver-level failures end up as a rejected query.
          estimate = PoseEstimate{};
        }
        lines[i] = EstimateLine::FromEstimate(task.scene->scene_id,
                                              task.query, estimate);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };

  const std::size_t threads =
      std::min(ResolveThreads(run.threads), std::max<std::size_t>(1, tasks.size()));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }
  for (const std::exception_ptr& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return lines;
}

std::vector<EvaluationRecord> ScoreEstimates(
    const std::vector<EstimateLine>& lines,
    const std::filesystem::path& dataset, const VirtualGrid& grid) {
  std::map<std::string, std::optional<SceneManifest>> scenes;
  std::vector<std::string> unmatched;
  std::set<std::pair<std::string, std::string>> seen;
  std::vector<EvaluationRecord> records;
  for (const EstimateLine& line : lines) {
    auto it = scenes.find(line.scene_id);
    if (it == scenes.end()) {
      std::optional<SceneManifest> manifest;
      if (std::filesystem::exists(dataset / line.scene_id / "intrinsics.txt")) {
        manifest = LoadScene(dataset, line.scene_id);
        if (!manifest->ground_truth) manifest.reset();
      }
      it = scenes.emplace(line.scene_id, std::move(manifest)).first;
    }
    const std::string name = line.scene_id + "/" + line.query_id;
    if (!seen.insert({line.scene_id, line.query_id}).second) {
      unmatched.push_back(name + " (duplicate)");
      continue;
    }
    const std::optional<SceneManifest>& scene = it->second;
    if (!scene || line.query_id == scene->reference ||
        !scene->ground_truth->count(line.query_id) ||
        !scene->intrinsics.count(line.query_id)) {
      unmatched.push_back(name);
      continue;
    }
    records.push_back(ScoreQuery(line.scene_id, line.query_id,
                                 line.ToEstimate(),
                                 scene->ground_truth->at(line.query_id),
                                 scene->intrinsics.at(line.query_id), grid));
  }
  if (!unmatched.empty()) {
    std::string msg = std::to_string(unmatched.size()) +
                      " estimate(s) without ground truth:";
    for (const std::string& u : unmatched) msg += "\n  " + u;
    throw MismatchError(msg);
  }
  return records;
}

int RunCli(int argc, const char* const* argv) {
  CLI::App app{"Map-free relocalization estimators and benchmark tools",
               "mapfree"};
  app.require_subcommand(1);

  RunConfig run;
  std::string config_path;
  std::string dataset;
  std::vector<std::string> scenes;
  std::optional<std::string> estimator;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::optional<double> inlier_threshold;
  std::optional<std::size_t> max_iterations;
  std::optional<double> ransac_confidence;
  std::optional<std::size_t> min_inliers;
  std::optional<double> scale_tolerance;
  std::optional<std::string> solver;
  std::vector<double> vcre_thresholds;
  std::optional<double> rotation_threshold;
  std::optional<double> translation_threshold;
  std::string estimates_path;
  std::string records_csv;
  std::string acceptance = "vcre-0.1";
  std::optional<int> num_scenes;
  std::optional<int> queries_per_scene;

  const auto add_config = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "Key-value config file");
  };
  const auto add_dataset = [&](CLI::App* cmd) {
    cmd->add_option("--dataset", dataset, "Dataset root directory");
    cmd->add_option("--scenes", scenes, "Scene ids (default: all)")
        ->delimiter(',');
  };
  const auto add_thresholds = [&](CLI::App* cmd) {
    cmd->add_option("--threshold-vcre", vcre_thresholds,
                    "VCRE thresholds as fractions of the image diagonal")
        ->delimiter(',');
    cmd->add_option("--threshold-rotation", rotation_threshold,
                    "Pose threshold, degrees");
    cmd->add_option("--threshold-translation", translation_threshold,
                    "Pose threshold, meters");
  };

  CLI::App* est = app.add_subcommand("estimate", "Estimate query poses");
  add_config(est);
  add_dataset(est);
  est->add_option("--estimator", estimator,
                  "essmat-dscale, pnp or procrustes");
  est->add_option("--seed", seed, "Global seed");
  est->add_option("--out", out, "Estimates file (default: stdout)");
  est->add_option("--inlier-threshold", inlier_threshold,
                  "Inlier threshold in the estimator's residual units");
  est->add_option("--max-iterations", max_iterations, "RANSAC iteration cap");
  est->add_option("--ransac-confidence", ransac_confidence,
                  "Adaptive termination confidence");
  est->add_option("--min-inliers", min_inliers, "Minimum consensus size");
  est->add_option("--scale-tolerance", scale_tolerance,
                  "Relative tolerance of the depth-scale consensus");
  est->add_option("--solver", solver, "five-point or eight-point");

  CLI::App* eval = app.add_subcommand("evaluate", "Score estimates");
  add_config(eval);
  add_thresholds(eval);
  eval->add_option("--estimates", estimates_path, "Estimates file")
      ->required();
  eval->add_option("--dataset", dataset, "Dataset root directory");
  eval->add_option("--out", out, "Report JSON (default: stdout)");
  eval->add_option("--records-csv", records_csv, "Per-query CSV");
  eval->add_option("--estimator", estimator, "Estimator name for the report");
  eval->add_option("--seed", seed, "Seed recorded in the report");

  CLI::App* curves = app.add_subcommand("curves", "Confidence sweep CSV");
  add_config(curves);
  add_thresholds(curves);
  curves->add_option("--estimates", estimates_path, "Estimates file")
      ->required();
  curves->add_option("--dataset", dataset, "Dataset root directory");
  curves->add_option("--acceptance", acceptance,
                     "pose or vcre-<fraction>, e.g. vcre-0.1");
  curves->add_option("--out", out, "CSV file (default: stdout)");

  CLI::App* synth = app.add_subcommand("synth", "Write a synthetic dataset");
  synth->add_option("--config", config_path, "Synthetic scene config file");
  synth->add_option("--out", out, "Output dataset root")->required();
  synth->add_option("--seed", seed, "Overrides rng_seed");
  synth->add_option("--num-scenes", num_scenes, "Overrides num_scenes");
  synth->add_option("--queries-per-scene", queries_per_scene,
                    "Overrides queries_per_scene");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (synth->parsed()) {
      SyntheticSceneConfig cfg;
      if (!config_path.empty()) {
        cfg = SyntheticSceneConfig::FromKeyValues(ReadKeyValues(config_path));
      }
      if (seed) cfg.rng_seed = *seed;
      if (num_scenes) cfg.num_scenes = *num_scenes;
      if (queries_per_scene) cfg.queries_per_scene = *queries_per_scene;
      cfg.Validate();
      const std::vector<SyntheticScene> data = GenerateSyntheticDataset(cfg);
      std::size_t queries = 0, matches = 0, outliers = 0;
      for (const SyntheticScene& s : data) {
        WriteScene(out, s);
        for (const SyntheticQuery& q : s.queries) {
          ++queries;
          matches += q.matches.size();
          for (char o : q.is_outlier) outliers += o ? 1 : 0;
        }
      }
      std::cout << "scenes " << data.size() << "\nqueries " << queries
                << "\nmatches " << matches << "\noutliers " << outliers
                << "\nmean_matches_per_query "
                << (queries ? static_cast<double>(matches) / queries : 0.0)
                << "\n";
      return 0;
    }

    if (!config_path.empty()) ApplyConfig(ReadKeyValues(config_path), run);
    if (!dataset.empty()) run.dataset = dataset;
    if (!scenes.empty()) run.scenes = scenes;
    if (estimator) run.estimator = ParseEstimatorKind(*estimator);
    if (seed) run.seed = *seed;
    EstimatorConfig& e = run.estimator_config;
    if (inlier_threshold) e.inlier_threshold = *inlier_threshold;
    if (max_iterations) e.max_iterations = *max_iterations;
    if (ransac_confidence) e.confidence = *ransac_confidence;
    if (min_inliers) e.min_inliers = *min_inliers;
    if (scale_tolerance) e.scale.relative_tolerance = *scale_tolerance;
    if (solver) e.essential_solver = ParseSolver(*solver);
    if (!vcre_thresholds.empty()) run.thresholds.vcre_fractions = vcre_thresholds;
    if (rotation_threshold) run.thresholds.rotation_deg = *rotation_threshold;
    if (translation_threshold) {
      run.thresholds.translation_m = *translation_threshold;
    }
    run.thresholds.Validate();
    run.grid.Validate();
    if (run.dataset.empty()) {
      throw InvalidParameterError("--dataset is required");
    }

    if (est->parsed()) {
      const std::vector<EstimateLine> lines = RunEstimates(run);
      WriteOutput(out, FormatEstimates(lines));
      std::size_t ok = 0;
      for (const EstimateLine& l : lines) {
        ok += l.status == EstimateStatus::kOk ? 1 : 0;
      }
      std::cerr << "estimated " << lines.size() << " queries, " << ok
                << " ok\n";
      return 0;
    }

    const std::vector<EstimateLine> lines = ReadEstimates(estimates_path);
    const std::vector<EvaluationRecord> records =
        ScoreEstimates(lines, run.dataset, run.grid);

    if (eval->parsed()) {
      ReportMeta meta;
      meta.grid = run.grid;
      meta.thresholds = run.thresholds;
      meta.seed = run.seed;
      meta.estimator = estimator.value_or("");
      const Report report = AggregateReport(records, meta);
      WriteOutput(out, ToJson(report).dump(2) + "\n");
      if (!records_csv.empty()) WriteFile(records_csv, RecordsCsv(records));
      std::ostream& rates = (out.empty() || out == "-") ? std::cerr : std::cout;
      for (const AcceptanceRate& r : report.acceptance) {
        rates << r.name << " " << r.accepted << "/" << r.total << " "
              << Percent(r.rate) << "\n";
      }
      return 0;
    }

    const AcceptanceCriterion criterion = AcceptanceCriterion::Parse(acceptance);
    const std::vector<CurvePoint> curve = PrecisionCurve(records, criterion);
    WriteOutput(out, CurveCsv(curve));
    if (!curve.empty()) std::cerr << "auc " << CurveAuc(curve) << "\n";
    return 0;
  } catch (const InvalidParameterError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const MismatchError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace mapfree

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <utility>
#include <vector>

#include "mapfree/error.h"
#include "mapfree/random.h"

namespace mapfree {

struct RansacConfig {
  std::size_t max_iterations = 10000;
  double inlier_threshold = 1.0;  // residual units of the residual function
  double confidence = 0.9999;
  std::size_t min_inliers = 5;
  std::uint64_t rng_seed = 0;

  // Throws InvalidParameterError on an invalid configuration.
  void Validate() const;
};

template <typename Model>
struct RobustResult {
  Model model;
  std::vector<char> inlier_mask;
  std::size_t inlier_count = 0;
  double score = 0.0;  // MSAC cost, sum of min(r², threshold²); lower is better
  std::size_t iterations = 0;
};

// Hypotheses needed to draw one all-inlier sample with probability
// `confidence`, clamped to [1, max_iterations].
std::size_t AdaptiveIterations(std::size_t inliers, std::size_t total,
                               std::size_t sample_size, double confidence,
                               std::size_t max_iterations);

// Draws `k` distinct indices from [0, n) by partial Fisher-Yates over
// `pool`, which must hold a permutation of [0, n).
void DrawSample(Rng& rng, std::vector<std::size_t>& pool, std::size_t k,
                std::vector<std::size_t>& sample);

inline double MsacTerm(double residual, double threshold) {
  const double r2 = residual * residual;
  const double t2 = threshold * threshold;
  return std::isfinite(r2) ? std::min(r2, t2) : t2;
}

// Hypothesize-and-verify with MSAC scoring.
//
// `solve(sample)` receives the drawn indices and returns a std::vector of
// candidate models (possibly empty). `residual(model, i)` is the residual of
// datum i. Deterministic for a given config.rng_seed. Throws
// NoConsensusError when no model reaches config.min_inliers.
//
// `refine(model, inlier_indices)` polishes the final model on its consensus
// set and returns candidate models; a candidate replaces the best model only
// if it lowers the score. Up to kRefineRounds rounds are run.
template <typename Model, typename Solver, typename Residual,
          typename Refiner>
RobustResult<Model> Ransac(std::size_t num_data, std::size_t sample_size,
                           Solver&& solve, Residual&& residual,
                           const RansacConfig& config, Refiner&& refine) {
  config.Validate();
  if (sample_size == 0 || num_data < sample_size) {
    throw NoConsensusError("not enough data for a minimal sample");
  }

  Rng rng(config.rng_seed);
  std::vector<std::size_t> pool(num_data);
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  std::vector<std::size_t> sample;

  RobustResult<Model> best;
  bool have_best = false;
  best.score = std::numeric_limits<double>::infinity();
  std::size_t needed = config.max_iterations;
  std::vector<char> mask(num_data);

  std::size_t iter = 0;
  for (; iter < needed; ++iter) {
    DrawSample(rng, pool, sample_size, sample);
    for (const Model& model : solve(sample)) {
      double score = 0.0;
      std::size_t count = 0;
      for (std::size_t i = 0; i < num_data; ++i) {
        const double r = residual(model, i);
        score += MsacTerm(r, config.inlier_threshold);
        const bool inlier = r <= config.inlier_threshold;
        mask[i] = inlier;
        count += inlier;
      }
      if (score < best.score) {
        best.model = model;
        best.score = score;
        best.inlier_mask = mask;
        best.inlier_count = count;
        have_best = true;
        needed = AdaptiveIterations(count, num_data, sample_size,
                                    config.confidence, config.max_iterations);
      }
    }
  }
  best.iterations = iter;
  if (!have_best || best.inlier_count < config.min_inliers) {
    throw NoConsensusError("no model reached the minimum inlier count");
  }

  constexpr int kRefineRounds = 3;
  std::vector<std::size_t> inliers;
  for (int round = 0; round < kRefineRounds; ++round) {
    inliers.clear();
    for (std::size_t i = 0; i < num_data; ++i) {
      if (best.inlier_mask[i]) inliers.push_back(i);
    }
    bool improved = false;
    for (const Model& model : refine(best.model, inliers)) {
      double score = 0.0;
      std::size_t count = 0;
      for (std::size_t i = 0; i < num_data; ++i) {
        const double r = residual(model, i);
        score += MsacTerm(r, config.inlier_threshold);
        const bool inlier = r <= config.inlier_threshold;
        mask[i] = inlier;
        count += inlier;
      }
      if (score < best.score && count >= config.min_inliers) {
        best.model = model;
        best.score = score;
        best.inlier_mask = mask;
        best.inlier_count = count;
        improved = true;
      }
    }
    if (!improved) break;
  }
  return best;
}

// Without a refinement step.
template <typename Model, typename Solver, typename Residual>
RobustResult<Model> Ransac(std::size_t num_data, std::size_t sample_size,
                           Solver&& solve, Residual&& residual,
                           const RansacConfig& config) {
  return Ransac<Model>(
      num_data, sample_size, std::forward<Solver>(solve),
      std::forward<Residual>(residual), config,
      [](const Model&, const std::vector<std::size_t>&) {
        return std::vector<Model>{};
      });
}

}  // namespace mapfree

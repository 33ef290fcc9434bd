#include <algorithm>
#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "mapfree/error.h"
#include "mapfree/io/synthetic.h"
#include "mapfree/pipelines/estimators.h"

namespace mapfree {
namespace {

constexpr EstimatorKind kAll[] = {EstimatorKind::kEssMatDScale,
                                  EstimatorKind::kPnP,
                                  EstimatorKind::kProcrustes};

SyntheticScene MakeScene(const SyntheticSceneConfig& cfg, std::uint64_t seed) {
  return GenerateSyntheticScene(cfg, "scene", seed);
}

PoseEstimate RunQuery(EstimatorKind kind, const SyntheticScene& s,
                      const EstimatorConfig& cfg = {}, std::size_t q = 0) {
  const SyntheticQuery& query = s.queries[q];
  return Estimate(kind, query.matches, s.depth_ref, query.depth, s.k_ref,
                  query.k, cfg);
}

struct Errors {
  double rot_deg;
  double trans_m;
};

Errors PoseErrors(const PoseEstimate& e, const Pose& gt) {
  return {RotationErrorDeg(e.pose->rotation, gt.rotation),
          TranslationErrorM(*e.pose, gt)};
}

TEST(Pipelines, NoiselessRecovery) {
  SyntheticSceneConfig cfg;
  double worst[3][2] = {};
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    const SyntheticScene s = MakeScene(cfg, seed);
    for (int k = 0; k < 3; ++k) {
      const PoseEstimate e = RunQuery(kAll[k], s);
      ASSERT_EQ(e.status, EstimateStatus::kOk) << ToString(kAll[k]) << seed;
      ASSERT_TRUE(e.pose && e.confidence);
      EXPECT_EQ(*e.confidence, static_cast<double>(std::count(
                                   e.inlier_mask.begin(), e.inlier_mask.end(), 1)));
      const Errors err = PoseErrors(e, s.queries[0].pose);
      worst[k][0] = std::max(worst[k][0], err.rot_deg);
      worst[k][1] = std::max(worst[k][1], err.trans_m);
    }
  }
  EXPECT_LT(worst[0][0], 1e-6);
  EXPECT_LT(worst[0][1], 1e-6);
  EXPECT_LT(worst[1][0], 1e-6);
  EXPECT_LT(worst[1][1], 1e-8);
  // Query depth is stored as float, which bounds Procrustes exactness.
  EXPECT_LT(worst[2][0], 1e-5);
  EXPECT_LT(worst[2][1], 1e-6);
}

DepthMap Scaled(const DepthMap& d, float lambda) {
  DepthMap out = d;
  for (float& v : out.values) v *= lambda;
  return out;
}

TEST(Pipelines, EssMatDepthScalePropagation) {
  SyntheticSceneConfig cfg;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const SyntheticScene s = MakeScene(cfg, seed);
    const SyntheticQuery& q = s.queries[0];
    const PoseEstimate base = RunQuery(EstimatorKind::kEssMatDScale, s);
    ASSERT_EQ(base.status, EstimateStatus::kOk);
    // Powers of two keep the float depths exact, so the relation is exact.
    for (float lambda : {0.5f, 2.0f, 4.0f}) {
      const PoseEstimate e = Estimate(
          EstimatorKind::kEssMatDScale, q.matches, Scaled(s.depth_ref, lambda),
          Scaled(q.depth, lambda), s.k_ref, q.k, {});
      ASSERT_EQ(e.status, EstimateStatus::kOk);
      EXPECT_EQ(e.pose->rotation.matrix(), base.pose->rotation.matrix());
      EXPECT_EQ(e.pose->translation, lambda * base.pose->translation);
    }
    const PoseEstimate e = Estimate(
        EstimatorKind::kEssMatDScale, q.matches, Scaled(s.depth_ref, 1.25f),
        Scaled(q.depth, 1.25f), s.k_ref, q.k, {});
    ASSERT_EQ(e.status, EstimateStatus::kOk);
    EXPECT_EQ(e.pose->rotation.matrix(), base.pose->rotation.matrix());
    EXPECT_NEAR(e.pose->translation.norm() / base.pose->translation.norm(), 1.25,
                1e-6);
  }
}

TEST(Pipelines, TooFewMatches) {
  SyntheticSceneConfig cfg;
  const SyntheticScene s = MakeScene(cfg, 3);
  const SyntheticQuery& q = s.queries[0];
  const std::size_t minimum[] = {5, 4, 3};
  for (int k = 0; k < 3; ++k) {
    for (std::size_t n = 0; n < minimum[k]; ++n) {
      const CorrespondenceSet few(q.matches.begin(), q.matches.begin() + n);
      const PoseEstimate e =
          Estimate(kAll[k], few, s.depth_ref, q.depth, s.k_ref, q.k, {});
      EXPECT_EQ(e.status, EstimateStatus::kNoEstimate) << ToString(kAll[k]) << n;
      EXPECT_FALSE(e.pose);
    }
  }
}

TEST(Pipelines, IdentityMotion) {
  SyntheticSceneConfig cfg;
  cfg.min_baseline = cfg.max_baseline = 0.0;
  cfg.max_rotation_deg = 0.0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const SyntheticScene s = MakeScene(cfg, seed);
    for (EstimatorKind kind : {EstimatorKind::kPnP, EstimatorKind::kProcrustes}) {
      const PoseEstimate e = RunQuery(kind, s);
      ASSERT_EQ(e.status, EstimateStatus::kOk);
      EXPECT_LT(RotationErrorDeg(e.pose->rotation, Rotation()), 1e-6);
      EXPECT_LT(e.pose->translation.norm(), 1e-6);
    }
  }
}

TEST(Pipelines, PureRotationHasNoEssentialEstimate) {
  SyntheticSceneConfig cfg;
  cfg.min_baseline = cfg.max_baseline = 0.0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const SyntheticScene s = MakeScene(cfg, seed);
    EXPECT_NE(RunQuery(EstimatorKind::kEssMatDScale, s).status, EstimateStatus::kOk);
    // Depth makes the rotation-only case well posed for the other two.
    const PoseEstimate pnp = RunQuery(EstimatorKind::kPnP, s);
    ASSERT_EQ(pnp.status, EstimateStatus::kOk);
    EXPECT_LT(PoseErrors(pnp, s.queries[0].pose).rot_deg, 1e-6);
  }
}

TEST(Pipelines, PnPWithOutliers) {
  SyntheticSceneConfig cfg;
  cfg.pixel_noise = 1.0;
  cfg.outlier_fraction = 0.4;
  int good = 0;
  const int trials = 100;
  for (int seed = 1; seed <= trials; ++seed) {
    const SyntheticScene s = MakeScene(cfg, seed);
    const PoseEstimate e = RunQuery(EstimatorKind::kPnP, s);
    if (e.status != EstimateStatus::kOk) continue;
    const Errors err = PoseErrors(e, s.queries[0].pose);
    good += err.rot_deg < 1.0 && err.trans_m < 0.05;
  }
  EXPECT_GE(good, 95);
}

TEST(Pipelines, ProcrustesDepthBias) {
  SyntheticSceneConfig cfg;
  std::vector<double> trans_err;
  std::vector<double> rot_err;
  for (double bias : {0.05, 0.1, 0.2}) {
    cfg.depth_bias = bias;
    double t_sum = 0.0, r_sum = 0.0;
    for (std::uint64_t seed = 1; seed <= 30; ++seed) {
      SyntheticSceneConfig c = cfg;
      // Only the query depth is biased.
      const SyntheticScene biased = MakeScene(c, seed);
      c.depth_bias = 0.0;
      const SyntheticScene clean = MakeScene(c, seed);
      const SyntheticQuery& q = biased.queries[0];
      const PoseEstimate e =
          Estimate(EstimatorKind::kProcrustes, q.matches, clean.depth_ref,
                   q.depth, clean.k_ref, q.k, {});
      ASSERT_EQ(e.status, EstimateStatus::kOk);
      const Errors err = PoseErrors(e, q.pose);
      t_sum += err.trans_m;
      r_sum += err.rot_deg;
    }
    trans_err.push_back(t_sum / 30);
    rot_err.push_back(r_sum / 30);
  }
  EXPECT_GT(trans_err[0], 1e-3);
  EXPECT_NEAR(trans_err[1] / trans_err[0], 2.0, 0.5);
  EXPECT_NEAR(trans_err[2] / trans_err[1], 2.0, 0.5);
  for (double r : rot_err) EXPECT_LT(r, 5.0);
}

TEST(Pipelines, ConfidenceIsMonotoneEvidence) {
  // Scenes with varying match counts and depth noise; fewer inliers give
  // worse poses, and the inlier count is the confidence.
  std::vector<std::pair<double, double>> conf_err;
  for (int i = 0; i < 1000; ++i) {
    SyntheticSceneConfig cfg;
    cfg.num_points = 15 + (i * 37) % 200;
    cfg.pixel_noise = 1.0;
    cfg.depth_noise = 0.05;
    cfg.outlier_fraction = 0.2;
    const SyntheticScene s = MakeScene(cfg, 5000 + i);
    EstimatorConfig ecfg;
    ecfg.rng_seed = i;
    const PoseEstimate e = RunQuery(EstimatorKind::kPnP, s, ecfg);
    if (e.status != EstimateStatus::kOk) continue;
    conf_err.push_back({*e.confidence, TranslationErrorM(*e.pose, s.queries[0].pose)});
  }
  ASSERT_GT(conf_err.size(), 900u);
  std::vector<double> confs;
  for (const auto& [c, err] : conf_err) confs.push_back(c);
  std::sort(confs.begin(), confs.end());
  double previous = INFINITY;
  for (int decile = 0; decile < 10; ++decile) {
    const double tau = confs[decile * confs.size() / 10];
    double sum = 0.0;
    int n = 0;
    for (const auto& [c, err] : conf_err) {
      if (c >= tau) {
        sum += err;
        ++n;
      }
    }
    const double mean = sum / n;
    EXPECT_LE(mean, previous) << "tau " << tau;
    previous = mean;
  }
}

TEST(Pipelines, Deterministic) {
  SyntheticSceneConfig cfg;
  cfg.pixel_noise = 1.0;
  cfg.outlier_fraction = 0.3;
  cfg.depth_noise = 0.02;
  const SyntheticScene s = MakeScene(cfg, 11);
  EstimatorConfig ecfg;
  ecfg.rng_seed = 1234;
  for (EstimatorKind kind : kAll) {
    const PoseEstimate a = RunQuery(kind, s, ecfg);
    const PoseEstimate b = RunQuery(kind, s, ecfg);
    ASSERT_EQ(a.status, b.status);
    ASSERT_EQ(a.status, EstimateStatus::kOk);
    EXPECT_EQ(a.pose->rotation.matrix(), b.pose->rotation.matrix());
    EXPECT_EQ(a.pose->translation, b.pose->translation);
    EXPECT_EQ(a.confidence, b.confidence);
    EXPECT_EQ(a.inlier_mask, b.inlier_mask);
  }
}

TEST(Pipelines, InlierMasksRejectInjectedOutliers) {
  SyntheticSceneConfig cfg;
  cfg.pixel_noise = 1.0;
  cfg.outlier_fraction = 0.4;
  for (EstimatorKind kind : kAll) {
    std::size_t outliers = 0, rejected = 0, inliers = 0, kept = 0;
    for (std::uint64_t seed = 1; seed <= 30; ++seed) {
      const SyntheticScene s = MakeScene(cfg, seed);
      const PoseEstimate e = RunQuery(kind, s);
      ASSERT_EQ(e.inlier_mask.size(), s.queries[0].matches.size());
      for (std::size_t i = 0; i < e.inlier_mask.size(); ++i) {
        if (s.queries[0].is_outlier[i]) {
          ++outliers;
          rejected += !e.inlier_mask[i];
        } else {
          ++inliers;
          kept += e.inlier_mask[i];
        }
      }
    }
    EXPECT_GE(static_cast<double>(rejected) / outliers, 0.95) << ToString(kind);
    // Noise enters through both pixels, so the default thresholds clip a
    // tail of true matches.
    EXPECT_GE(static_cast<double>(kept) / inliers, 0.85) << ToString(kind);
  }
}

TEST(Pipelines, StatusStrings) {
  for (EstimateStatus st : {EstimateStatus::kOk, EstimateStatus::kNoEstimate,
                            EstimateStatus::kDegenerateScale}) {
    EXPECT_EQ(ParseEstimateStatus(ToString(st)), st);
  }
  for (EstimatorKind k : kAll) EXPECT_EQ(ParseEstimatorKind(ToString(k)), k);
  EXPECT_THROW(ParseEstimatorKind("magsac"), InvalidParameterError);
}

}  // namespace
}  // namespace mapfree

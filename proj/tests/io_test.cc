#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include <unistd.h>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "mapfree/cli/commands.h"
#include "mapfree/error.h"
#include "mapfree/io/formats.h"
#include "mapfree/io/scene.h"
#include "mapfree/io/synthetic.h"
#include "test_support.h"

namespace mapfree {
namespace {

namespace fs = std::filesystem;

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = fs::temp_directory_path() /
            ("mapfree_io_test_" + std::to_string(::getpid()) + "_" +
             std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

template <typename F>
FormatError CatchFormat(F&& f) {
  try {
    f();
  } catch (const FormatError& e) {
    return e;
  }
  ADD_FAILURE() << "no FormatError";
  return FormatError("", 0, "");
}

TEST(Poses, ParseAndRoundTrip) {
  const std::string text =
      "# comment\n"
      "reference 1 0 0 0 0 0 0\n"
      "\n"
      "query_000 0.5 0.5 0.5 0.5 1.25 -2 3.5\n";
  const auto poses = ParsePoses(text, "poses.txt");
  ASSERT_EQ(poses.size(), 2u);
  EXPECT_EQ(poses[1].frame, "query_000");
  EXPECT_EQ(poses[1].line, 4u);
  EXPECT_EQ(poses[1].t, Eigen::Vector3d(1.25, -2, 3.5));
  const std::string once = FormatPoses(poses);
  EXPECT_EQ(FormatPoses(ParsePoses(once, "x")), once);

  Rng rng(1);
  std::vector<PoseRecord> random;
  for (int i = 0; i < 50; ++i) {
    random.push_back(PoseRecord::FromPose("f" + std::to_string(i),
                                          testing::RandomPose(rng, 180, 10)));
  }
  const std::string a = FormatPoses(random);
  const auto back = ParsePoses(a, "x");
  EXPECT_EQ(FormatPoses(back), a);
  for (std::size_t i = 0; i < back.size(); ++i) {
    EXPECT_EQ(back[i].t, random[i].t);
    EXPECT_EQ(back[i].q.w, random[i].q.w);
  }
}

TEST(Poses, MalformedLinesAreLocated) {
  const FormatError e = CatchFormat([] {
    ParsePoses("reference 1 0 0 0 0 0 0\nquery 0.5 0 0 0 1 2 3\n", "scene/poses.txt");
  });
  EXPECT_EQ(e.line(), 2u);
  EXPECT_EQ(e.path(), "scene/poses.txt");
  EXPECT_NE(std::string(e.what()).find("scene/poses.txt:2"), std::string::npos);

  EXPECT_EQ(CatchFormat([] { ParsePoses("a 1 0 0 0 0 0\n", "p"); }).line(), 1u);
  EXPECT_EQ(CatchFormat([] { ParsePoses("a 1 0 0 0 0 0 x\n", "p"); }).line(), 1u);
  EXPECT_EQ(CatchFormat([] { ParsePoses("\n\na 1 0 0 0 0 0 0 9\n", "p"); }).line(), 3u);
  EXPECT_EQ(CatchFormat([] { ParsePoses("a 1 0 0 0 nan 0 0\n", "p"); }).line(), 1u);
  // Within tolerance of unit norm is accepted and normalized.
  const auto ok = ParsePoses("a 1.0005 0 0 0 0 0 0\n", "p");
  EXPECT_NEAR(ok[0].ToPose().rotation.matrix()(0, 0), 1.0, 1e-15);
}

TEST(Intrinsics, RoundTripAndErrors) {
  const std::string text = "reference 500 510 320 240 640 480\nq 400.5 400.5 100 90 200 180\n";
  const auto recs = ParseIntrinsics(text, "i");
  ASSERT_EQ(recs.size(), 2u);
  EXPECT_EQ(recs[1].k.width, 200);
  EXPECT_EQ(recs[0].k.fy, 510);
  const std::string once = FormatIntrinsics(recs);
  EXPECT_EQ(FormatIntrinsics(ParseIntrinsics(once, "i")), once);
  EXPECT_EQ(CatchFormat([] { ParseIntrinsics("a 500 500 320 240 640\n", "i"); }).line(), 1u);
  EXPECT_EQ(CatchFormat([] { ParseIntrinsics("a 500 500 320 240 640 480\nb -5 500 1 1 4 4\n", "i"); }).line(), 2u);
  EXPECT_EQ(CatchFormat([] { ParseIntrinsics("a 500 500 320 240 640.5 480\n", "i"); }).line(), 1u);
}

TEST(DepthMaps, ValidityAndRoundTrip) {
  DepthMap d(2, 2);
  d.values = {1.0f, 2.0f, 0.0f, std::numeric_limits<float>::quiet_NaN()};
  EXPECT_EQ(d.ValidCount(), 2u);
  const std::string bytes = EncodeDepthMap(d);
  ASSERT_EQ(bytes.size(), 12u + 16u);
  EXPECT_EQ(bytes.substr(0, 4), "MFDM");
  const DepthMap back = DecodeDepthMap(bytes, "d");
  EXPECT_EQ(back.width, 2);
  EXPECT_EQ(back.height, 2);
  EXPECT_EQ(std::memcmp(back.values.data(), d.values.data(), 16), 0);
  EXPECT_EQ(EncodeDepthMap(back), bytes);
  EXPECT_EQ(*back.Sample({0.2, 0.4}), 1.0);
  EXPECT_EQ(*back.Sample({1.4, 0.4}), 2.0);
  EXPECT_FALSE(back.Sample({0.2, -0.4}));
  EXPECT_FALSE(back.Sample({0, 1}));
  EXPECT_FALSE(back.Sample({1, 1}));

  TempDir tmp;
  WriteDepthMap(tmp.path() / "a.mfdm", d);
  EXPECT_EQ(ReadFile(tmp.path() / "a.mfdm"), bytes);
}

TEST(DepthMaps, MalformedFilesAreLocated) {
  DepthMap d(3, 2, 1.5f);
  const std::string bytes = EncodeDepthMap(d);
  const FormatError trunc =
      CatchFormat([&] { DecodeDepthMap(bytes.substr(0, bytes.size() - 3), "d.mfdm"); });
  EXPECT_NE(std::string(trunc.what()).find("truncated"), std::string::npos);
  EXPECT_EQ(trunc.line(), bytes.size() - 3);
  EXPECT_EQ(CatchFormat([&] { DecodeDepthMap(bytes.substr(0, 7), "d"); }).line(), 0u);
  std::string bad = bytes;
  bad[0] = 'X';
  EXPECT_NE(std::string(CatchFormat([&] { DecodeDepthMap(bad, "d"); }).what()).find("magic"),
            std::string::npos);
  EXPECT_THROW(DecodeDepthMap(bytes + "z", "d"), FormatError);

  TempDir tmp;
  WriteDepthMap(tmp.path() / "d.mfdm", d);
  const CameraIntrinsics k{100, 100, 1, 1, 3, 2};
  EXPECT_NO_THROW(ReadDepthMap(tmp.path() / "d.mfdm", k));
  const CameraIntrinsics wrong{100, 100, 1, 1, 4, 2};
  EXPECT_THROW(ReadDepthMap(tmp.path() / "d.mfdm", wrong), FormatError);
  EXPECT_THROW(ReadDepthMap(tmp.path() / "missing.mfdm"), IoError);
}

TEST(Correspondences, ParseBoundsAndRoundTrip) {
  EXPECT_TRUE(ParseCorrespondences("", "m").empty());
  const std::string five =
      "1 2 3 4 0.5\n10 20 30 40 1\n0 0 0 0 0\n639.5 479.5 1 1 0.25\n5 5 6 6 0.75\n";
  const CameraIntrinsics k = testing::TestCamera();
  const auto m = ParseCorrespondences(five, "m", &k, &k);
  ASSERT_EQ(m.size(), 5u);
  EXPECT_EQ(m[3].ref_px, Eigen::Vector2d(639.5, 479.5));
  EXPECT_EQ(m[0].score, 0.5);
  const std::string once = FormatCorrespondences(m);
  EXPECT_EQ(FormatCorrespondences(ParseCorrespondences(once, "m")), once);

  const FormatError oob =
      CatchFormat([&] { ParseCorrespondences("1 2 3 4 1\n640 2 3 4 1\n", "m.txt", &k, &k); });
  EXPECT_EQ(oob.line(), 2u);
  EXPECT_NE(std::string(oob.what()).find("outside"), std::string::npos);
  EXPECT_EQ(CatchFormat([&] { ParseCorrespondences("1 2 3 -0.1 1\n", "m", &k, &k); }).line(), 1u);
  EXPECT_EQ(CatchFormat([] { ParseCorrespondences("1 2 3 4\n", "m"); }).line(), 1u);
  EXPECT_EQ(CatchFormat([] { ParseCorrespondences("1 2 3 4 1.5\n", "m"); }).line(), 1u);
  // Without intrinsics there is no bound check.
  EXPECT_EQ(ParseCorrespondences("1000 2 3 4 1\n", "m").size(), 1u);
}

TEST(Estimates, RoundTripWithPlaceholders) {
  PoseEstimate ok;
  ok.status = EstimateStatus::kOk;
  ok.pose = Pose{Rotation(testing::Rz(10)), Eigen::Vector3d(0.1, 0.2, 0.3)};
  ok.confidence = 17;
  PoseEstimate none;
  PoseEstimate degenerate;
  degenerate.status = EstimateStatus::kDegenerateScale;
  degenerate.confidence = 3;
  const std::vector<EstimateLine> lines = {
      EstimateLine::FromEstimate("s", "q1", ok),
      EstimateLine::FromEstimate("s", "q2", none),
      EstimateLine::FromEstimate("s", "q3", degenerate)};
  const std::string text = FormatEstimates(lines);
  EXPECT_NE(text.find("s q2 no_estimate nan nan nan nan nan nan nan nan"),
            std::string::npos)
      << text;
  const auto back = ParseEstimates(text, "e");
  EXPECT_EQ(FormatEstimates(back), text);
  const PoseEstimate e = back[0].ToEstimate();
  EXPECT_LT(RotationErrorDeg(e.pose->rotation, ok.pose->rotation), 1e-12);
  EXPECT_EQ(e.pose->translation, ok.pose->translation);
  EXPECT_FALSE(back[1].ToEstimate().pose);
  EXPECT_EQ(*back[2].ToEstimate().confidence, 3);

  EXPECT_EQ(CatchFormat([&] { ParseEstimates(text + text, "e"); }).line(), 4u);
  EXPECT_EQ(CatchFormat([] { ParseEstimates("s q ok nan 0 0 0 0 0 0 1\n", "e"); }).line(), 1u);
  EXPECT_EQ(CatchFormat([] { ParseEstimates("s q bogus nan nan nan nan nan nan nan nan\n", "e"); }).line(), 1u);
}

TEST(KeyValues, Parse) {
  const auto kv = ParseKeyValues("# c\na = 1\nb 2\na=3\n", "k");
  EXPECT_EQ(kv.at("a"), "3");
  EXPECT_EQ(kv.at("b"), "2");
  EXPECT_EQ(CatchFormat([] { ParseKeyValues("ok = 1\nlonely\n", "k"); }).line(), 2u);
}

void ExpectSameTree(const fs::path& a, const fs::path& b) {
  std::vector<fs::path> files;
  for (const auto& entry : fs::recursive_directory_iterator(a)) {
    if (entry.is_regular_file()) files.push_back(fs::relative(entry.path(), a));
  }
  ASSERT_FALSE(files.empty());
  std::size_t count_b = 0;
  for (const auto& entry : fs::recursive_directory_iterator(b)) {
    count_b += entry.is_regular_file();
  }
  EXPECT_EQ(files.size(), count_b);
  for (const fs::path& f : files) {
    EXPECT_EQ(ReadFile(a / f), ReadFile(b / f)) << f;
  }
}

TEST(Scene, SyntheticWriteLoadMatchesMemory) {
  SyntheticSceneConfig cfg;
  cfg.queries_per_scene = 2;
  cfg.pixel_noise = 0.5;
  cfg.outlier_fraction = 0.1;
  const SyntheticScene s = GenerateSyntheticScene(cfg, "scene_007", 99);
  TempDir tmp;
  WriteScene(tmp.path(), s);
  EXPECT_EQ(ListScenes(tmp.path()), std::vector<std::string>{"scene_007"});
  const SceneManifest m = LoadScene(tmp.path(), "scene_007");
  EXPECT_EQ(m.reference, "reference");
  ASSERT_EQ(m.queries.size(), 2u);
  ASSERT_TRUE(m.ground_truth);
  for (std::size_t i = 0; i < 2; ++i) {
    const SyntheticQuery& q = s.queries[i];
    EXPECT_EQ(m.queries[i], q.query_id);
    const Pose& gt = m.ground_truth->at(q.query_id);
    EXPECT_LT(RotationErrorDeg(gt.rotation, q.pose.rotation), 1e-9);
    EXPECT_LT((gt.translation - q.pose.translation).norm(), 1e-15);
    const QueryInputs in = LoadQueryInputs(m, q.query_id);
    EXPECT_EQ(in.depth_ref.values, s.depth_ref.values);
    EXPECT_EQ(EncodeDepthMap(in.depth_query), EncodeDepthMap(q.depth));
    ASSERT_EQ(in.matches.size(), q.matches.size());
    for (std::size_t j = 0; j < q.matches.size(); ++j) {
      EXPECT_EQ(in.matches[j].ref_px, q.matches[j].ref_px);
      EXPECT_EQ(in.matches[j].query_px, q.matches[j].query_px);
    }
  }
  EXPECT_THROW(LoadQueryInputs(m, "nope"), Error);
}

TEST(Scene, MinimalSceneAndReferenceChecks) {
  TempDir tmp;
  const fs::path dir = tmp.path() / "s";
  fs::create_directories(dir / "depth");
  fs::create_directories(dir / "matches");
  WriteFile(dir / "intrinsics.txt", "ref 100 100 2 2 4 4\nq 100 100 2 2 4 4\n");
  WriteFile(dir / "poses.txt", "ref 1 0 0 0 0 0 0\nq 1 0 0 0 0.5 0 0\n");
  WriteDepthMap(dir / "depth" / "ref.mfdm", DepthMap(4, 4, 2.0f));
  WriteDepthMap(dir / "depth" / "q.mfdm", DepthMap(4, 4, 2.0f));
  WriteFile(dir / "matches" / "q.txt", "");
  const SceneManifest m = LoadScene(tmp.path(), "s");
  EXPECT_EQ(m.queries, std::vector<std::string>{"q"});
  EXPECT_TRUE(LoadQueryInputs(m, "q").matches.empty());

  WriteFile(dir / "poses.txt", "ref 1 0 0 0 0.1 0 0\nq 1 0 0 0 0.5 0 0\n");
  const FormatError e = CatchFormat([&] { LoadScene(tmp.path(), "s"); });
  EXPECT_EQ(e.line(), 1u);

  WriteFile(dir / "poses.txt", "ref 1 0 0 0 0 0 0\nq 0.5 0 0 0 0.5 0 0\n");
  EXPECT_EQ(CatchFormat([&] { LoadScene(tmp.path(), "s"); }).line(), 2u);

  fs::remove(dir / "poses.txt");
  EXPECT_FALSE(LoadScene(tmp.path(), "s").ground_truth);

  WriteFile(dir / "matches" / "q.txt", "1 1 1 4 1\n");
  EXPECT_THROW(LoadQueryInputs(LoadScene(tmp.path(), "s"), "q"), FormatError);
  EXPECT_THROW(LoadScene(tmp.path(), "absent"), IoError);
}

TEST(Synthetic, DeterministicFiles) {
  SyntheticSceneConfig cfg;
  cfg.num_scenes = 2;
  cfg.queries_per_scene = 2;
  cfg.pixel_noise = 1.0;
  cfg.outlier_fraction = 0.3;
  cfg.depth_noise = 0.05;
  cfg.rng_seed = 5;
  TempDir a, b;
  for (const auto& s : GenerateSyntheticDataset(cfg)) WriteScene(a.path(), s);
  for (const auto& s : GenerateSyntheticDataset(cfg)) WriteScene(b.path(), s);
  ExpectSameTree(a.path(), b.path());

  cfg.rng_seed = 6;
  const auto other = GenerateSyntheticDataset(cfg);
  const auto first = GenerateSyntheticDataset(SyntheticSceneConfig(cfg)).front();
  EXPECT_EQ(FormatCorrespondences(first.queries[0].matches),
            FormatCorrespondences(other.front().queries[0].matches));
  cfg.rng_seed = 5;
  EXPECT_NE(FormatCorrespondences(GenerateSyntheticDataset(cfg).front().queries[0].matches),
            FormatCorrespondences(other.front().queries[0].matches));
}

TEST(Synthetic, GeneratedDataIsConsistent) {
  SyntheticSceneConfig cfg;
  const SyntheticScene s = GenerateSyntheticScene(cfg, "x", 3);
  const SyntheticQuery& q = s.queries[0];
  ASSERT_GE(q.matches.size(), static_cast<std::size_t>(cfg.min_visible));
  for (const Correspondence& c : q.matches) {
    const Eigen::Vector3d x = Backproject(s.k_ref, c.ref_px, *s.depth_ref.Sample(c.ref_px));
    const Eigen::Vector3d y = q.pose.Apply(x);
    EXPECT_LT((Project(q.k, y) - c.query_px).norm(), 1e-9);
    EXPECT_NEAR(*q.depth.Sample(c.query_px), y.z(), 1e-6 * y.z());
  }
}

TEST(Synthetic, ConfigKeyValues) {
  SyntheticSceneConfig cfg;
  cfg.pixel_noise = 0.3;
  cfg.rng_seed = 77;
  const auto kv = cfg.ToKeyValues();
  const SyntheticSceneConfig back = SyntheticSceneConfig::FromKeyValues(kv);
  EXPECT_EQ(back.ToKeyValues(), kv);
  EXPECT_THROW(SyntheticSceneConfig::FromKeyValues({{"bogus", "1"}}),
               InvalidParameterError);
  EXPECT_THROW(SyntheticSceneConfig::FromKeyValues({{"outlier_fraction", "1"}}),
               InvalidParameterError);
  EXPECT_THROW(SyntheticSceneConfig::FromKeyValues({{"num_points", "x"}}),
               InvalidParameterError);
}

int Cli(std::vector<std::string> args) {
  args.insert(args.begin(), "mapfree");
  std::vector<const char*> argv;
  for (const std::string& a : args) argv.push_back(a.c_str());
  return RunCli(static_cast<int>(argv.size()), argv.data());
}

TEST(Cli, EndToEndAndExitCodes) {
  TempDir tmp;
  const std::string data = (tmp.path() / "data").string();
  const std::string est = (tmp.path() / "est.txt").string();
  const std::string est2 = (tmp.path() / "est2.txt").string();
  const std::string report = (tmp.path() / "report.json").string();
  ASSERT_EQ(Cli({"synth", "--out", data, "--num-scenes", "2", "--queries-per-scene", "2"}), 0);
  EXPECT_EQ(ListScenes(data).size(), 2u);
  ASSERT_EQ(Cli({"estimate", "--dataset", data, "--estimator", "pnp", "--out", est}), 0);
  ASSERT_EQ(Cli({"estimate", "--dataset", data, "--estimator", "pnp", "--out", est2}), 0);
  EXPECT_EQ(ReadFile(est), ReadFile(est2));
  EXPECT_EQ(ReadEstimates(est).size(), 4u);
  ASSERT_EQ(Cli({"evaluate", "--estimates", est, "--dataset", data, "--out", report}), 0);
  const nlohmann::json j = nlohmann::json::parse(ReadFile(report));
  EXPECT_EQ(j.at("num_records"), 4);
  EXPECT_EQ(Cli({"curves", "--estimates", est, "--dataset", data, "--out",
                 (tmp.path() / "c.csv").string()}),
            0);

  // A subset of the queries is fine; an estimate without ground truth is not.
  std::vector<EstimateLine> lines = ReadEstimates(est);
  lines.pop_back();
  WriteEstimates(est2, lines);
  EXPECT_EQ(Cli({"evaluate", "--estimates", est2, "--dataset", data, "--out", report}), 0);
  EXPECT_EQ(nlohmann::json::parse(ReadFile(report)).at("num_records"), 3);
  WriteFile(est2, "");
  const std::string csv = (tmp.path() / "empty.csv").string();
  EXPECT_EQ(Cli({"curves", "--estimates", est2, "--dataset", data, "--out", csv}), 0);
  EXPECT_EQ(ReadFile(csv), "threshold,ratio,precision\n");
  lines.push_back(lines.front());
  lines.back().query_id = "not_a_query";
  WriteEstimates(est2, lines);
  EXPECT_EQ(Cli({"evaluate", "--estimates", est2, "--dataset", data}), 3);

  EXPECT_EQ(Cli({"estimate", "--dataset", data, "--estimator", "magic", "--out", est2}), 1);
  EXPECT_EQ(Cli({"estimate", "--no-such-flag"}), 1);
  EXPECT_EQ(Cli({}), 1);
  EXPECT_EQ(Cli({"estimate", "--dataset", (tmp.path() / "missing").string(),
                 "--out", est2}),
            2);
  WriteFile(est2, "garbage line\n");
  EXPECT_EQ(Cli({"evaluate", "--estimates", est2, "--dataset", data}), 2);
}

TEST(Cli, ConfigKeys) {
  RunConfig run;
  ApplyConfig({{"estimator", "procrustes"},
               {"seed", "9"},
               {"inlier_threshold", "0.2"},
               {"threshold_vcre", "0.05, 0.2"},
               {"grid_offset", "2.0"}},
              run);
  EXPECT_EQ(run.estimator, EstimatorKind::kProcrustes);
  EXPECT_EQ(run.seed, 9u);
  EXPECT_EQ(*run.estimator_config.inlier_threshold, 0.2);
  EXPECT_EQ(run.thresholds.vcre_fractions, (std::vector<double>{0.05, 0.2}));
  EXPECT_EQ(run.grid.offset, 2.0);
  EXPECT_THROW(ApplyConfig({{"unknown_key", "1"}}, run), InvalidParameterError);
  EXPECT_THROW(ApplyConfig({{"confidence", "1.5"}}, run), InvalidParameterError);
}

}  // namespace
}  // namespace mapfree

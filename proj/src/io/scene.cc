#include "mapfree/io/scene.h"

#include <algorithm>

#include "mapfree/error.h"
#include "mapfree/io/formats.h"

namespace mapfree {
namespace {

constexpr double kIdentityTolerance = 1e-9;

}  // namespace

std::filesystem::path SceneManifest::IntrinsicsPath() const {
  return directory / "intrinsics.txt";
}

std::filesystem::path SceneManifest::PosesPath() const {
  return directory / "poses.txt";
}

std::filesystem::path SceneManifest::DepthPath(const std::string& frame) const {
  return directory / "depth" / (frame + ".mfdm");
}

std::filesystem::path SceneManifest::MatchesPath(
    const std::string& query) const {
  return directory / "matches" / (query + ".txt");
}

SceneManifest LoadScene(const std::filesystem::path& root,
                        const std::string& scene_id) {
  SceneManifest scene;
  scene.scene_id = scene_id;
  scene.directory = root / scene_id;
  if (!std::filesystem::is_directory(scene.directory)) {
    throw IoError("scene directory not found: " + scene.directory.string());
  }

  const std::vector<IntrinsicsRecord> intrinsics =
      ReadIntrinsics(scene.IntrinsicsPath());
  if (intrinsics.empty()) {
    throw FormatError(scene.IntrinsicsPath().string(), 1,
                      "no frames listed");
  }
  scene.reference = intrinsics.front().frame;
  for (const IntrinsicsRecord& r : intrinsics) {
    scene.intrinsics[r.frame] = r.k;
    if (r.frame != scene.reference) scene.queries.push_back(r.frame);
  }

  if (std::filesystem::exists(scene.PosesPath())) {
    const std::string source = scene.PosesPath().string();
    const std::vector<PoseRecord> records = ReadPoses(scene.PosesPath());
    std::map<std::string, Pose> poses;
    for (const PoseRecord& r : records) poses[r.frame] = r.ToPose();
    const auto ref = poses.find(scene.reference);
    if (ref == poses.end()) {
      throw FormatError(source, 0,
                        "reference frame '" + scene.reference +
                            "' has no pose");
    }
    const Pose& p = ref->second;
    const bool identity =
        (p.rotation.matrix() - Eigen::Matrix3d::Identity())
                .cwiseAbs()
                .maxCoeff() <= kIdentityTolerance &&
        p.translation.cwiseAbs().maxCoeff() <= kIdentityTolerance;
    if (!identity) {
      std::size_t line = 0;
      for (const PoseRecord& r : records) {
        if (r.frame == scene.reference) line = r.line;
      }
      throw FormatError(source, line, "reference pose must be the identity");
    }
    scene.ground_truth = std::move(poses);
  }
  return scene;
}

std::vector<std::string> ListScenes(const std::filesystem::path& root) {
  if (!std::filesystem::is_directory(root)) {
    throw IoError("dataset root not found: " + root.string());
  }
  std::vector<std::string> scenes;
  for (const auto& entry : std::filesystem::directory_iterator(root)) {
    if (entry.is_directory() &&
        std::filesystem::exists(entry.path() / "intrinsics.txt")) {
      scenes.push_back(entry.path().filename().string());
    }
  }
  std::sort(scenes.begin(), scenes.end());
  return scenes;
}

QueryInputs LoadQueryInputs(const SceneManifest& scene,
                            const std::string& query) {
  const auto kq = scene.intrinsics.find(query);
  if (kq == scene.intrinsics.end()) {
    throw IoError("no intrinsics for query '" + query + "' in scene " +
                  scene.scene_id);
  }
  QueryInputs in;
  in.k_ref = scene.intrinsics.at(scene.reference);
  in.k_query = kq->second;
  in.depth_ref = ReadDepthMap(scene.DepthPath(scene.reference), in.k_ref);
  in.depth_query = ReadDepthMap(scene.DepthPath(query), in.k_query);
  in.matches =
      ReadCorrespondences(scene.MatchesPath(query), &in.k_ref, &in.k_query);
  return in;
}

}  // namespace mapfree

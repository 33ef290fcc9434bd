#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mapfree/data.h"
#include "mapfree/geometry/camera.h"
#include "mapfree/geometry/pose.h"

namespace mapfree {

// On-disk scene layout:
//
//   root/<scene_id>/intrinsics.txt     first line is the reference frame
//   root/<scene_id>/poses.txt          optional ground truth
//   root/<scene_id>/depth/<frame>.mfdm
//   root/<scene_id>/matches/<query>.txt  reference-to-query matches
//
// Every frame after the first line of intrinsics.txt is a query, in file
// order. When poses.txt exists the reference pose must be the identity.
struct SceneManifest {
  std::string scene_id;
  std::filesystem::path directory;
  std::string reference;
  std::vector<std::string> queries;
  std::map<std::string, CameraIntrinsics> intrinsics;
  std::optional<std::map<std::string, Pose>> ground_truth;

  std::filesystem::path IntrinsicsPath() const;
  std::filesystem::path PosesPath() const;
  std::filesystem::path DepthPath(const std::string& frame) const;
  std::filesystem::path MatchesPath(const std::string& query) const;
};

// Throws IoError for a missing directory or file and FormatError for
// malformed content or a non-identity reference pose.
SceneManifest LoadScene(const std::filesystem::path& root,
                        const std::string& scene_id);

// Scene directories under `root` that contain intrinsics.txt, sorted.
std::vector<std::string> ListScenes(const std::filesystem::path& root);

// Inputs for one reference/query pair, loaded and validated.
struct QueryInputs {
  CameraIntrinsics k_ref;
  CameraIntrinsics k_query;
  DepthMap depth_ref;
  DepthMap depth_query;
  CorrespondenceSet matches;
};

// Throws IoError when a depth or matches file is missing, FormatError when
// one is malformed or its size disagrees with the intrinsics.
QueryInputs LoadQueryInputs(const SceneManifest& scene,
                            const std::string& query);

}  // namespace mapfree

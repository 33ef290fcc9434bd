#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "mapfree/data.h"
#include "mapfree/geometry/camera.h"
#include "mapfree/geometry/pose.h"

namespace mapfree {

// Random scenes with a reference camera at the origin and query cameras
// with known relative pose. Everything is determined by rng_seed.
struct SyntheticSceneConfig {
  int num_scenes = 1;
  int queries_per_scene = 1;
  int num_points = 200;  // reference-visible scene points
  int width = 640;
  int height = 480;
  double focal = 500.0;
  double min_depth = 2.0;  // meters
  double max_depth = 8.0;
  double min_baseline = 0.3;  // query camera center distance, meters
  double max_baseline = 1.5;
  double max_rotation_deg = 20.0;
  double pixel_noise = 0.0;       // sigma, pixels, both images
  double outlier_fraction = 0.0;  // share of matches with a random query pixel
  double depth_noise = 0.0;       // multiplicative sigma
  double depth_bias = 0.0;        // relative, e.g. 0.2 for +20%
  double background_depth = 10.0;  // depth of pixels without a point
  int min_visible = 12;  // query draws with fewer visible points are retried
  std::uint64_t rng_seed = 1;

  void Validate() const;

  // Key-value round trip with the same keys as the field names.
  std::map<std::string, std::string> ToKeyValues() const;
  static SyntheticSceneConfig FromKeyValues(
      const std::map<std::string, std::string>& values);
};

struct SyntheticQuery {
  std::string query_id;
  Pose pose;  // ground truth, reference frame is the world
  CameraIntrinsics k;
  DepthMap depth;
  CorrespondenceSet matches;
  std::vector<char> is_outlier;  // per match
};

struct SyntheticScene {
  std::string scene_id;
  CameraIntrinsics k_ref;
  DepthMap depth_ref;
  std::vector<SyntheticQuery> queries;
};

// Throws InvalidParameterError for invalid configs and Error when no
// query pose with enough visible points can be found.
SyntheticScene GenerateSyntheticScene(const SyntheticSceneConfig& config,
                                      const std::string& scene_id,
                                      std::uint64_t seed);

// Scenes "scene_000", "scene_001", ... with seeds derived from rng_seed.
std::vector<SyntheticScene> GenerateSyntheticDataset(
    const SyntheticSceneConfig& config);

// Writes one scene in the on-disk layout described in scene.h, including
// poses.txt with the identity reference pose.
void WriteScene(const std::filesystem::path& root, const SyntheticScene& scene);

}  // namespace mapfree

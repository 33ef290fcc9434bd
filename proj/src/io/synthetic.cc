#include "mapfree/io/synthetic.h"

#include <cmath>
#include <cstdio>
#include <numbers>

#include <Eigen/Geometry>

#include "mapfree/error.h"
#include "mapfree/io/formats.h"
#include "mapfree/random.h"

namespace mapfree {
namespace {

constexpr int kPointAttemptsPerPoint = 50;
constexpr int kPoseAttempts = 200;
constexpr const char* kReferenceFrame = "reference";

Eigen::Vector3d RandomUnitVector(Rng& rng) {
  Eigen::Vector3d v;
  do {
    v = Eigen::Vector3d(rng.Normal(), rng.Normal(), rng.Normal());
  } while (v.norm() < 1e-6);
  return v.normalized();
}

float NoisyDepth(double depth, const SyntheticSceneConfig& c, Rng& rng) {
  double d = depth;
  if (c.depth_bias != 0.0) d *= 1.0 + c.depth_bias;
  if (c.depth_noise > 0.0) d *= 1.0 + c.depth_noise * rng.Normal();
  return static_cast<float>(std::max(d, 1e-3));
}

Eigen::Vector2d Noisy(const Eigen::Vector2d& px, double sigma, Rng& rng) {
  if (sigma <= 0.0) return px;
  return px + sigma * Eigen::Vector2d(rng.Normal(), rng.Normal());
}

std::string FormatId(const char* prefix, int i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s_%03d", prefix, i);
  return buf;
}

struct ScenePoint {
  Eigen::Vector3d position;  // reference camera frame
  Eigen::Vector2d ref_px;    // observed, possibly noisy
};

}  // namespace

void SyntheticSceneConfig::Validate() const {
  const auto require = [](bool ok, const char* what) {
    if (!ok) throw InvalidParameterError(std::string("synthetic config: ") + what);
  };
  require(num_scenes >= 1 && queries_per_scene >= 1,
          "scene and query counts must be positive");
  require(num_points >= 1, "num_points must be positive");
  require(width > 0 && height > 0, "image size must be positive");
  require(focal > 0.0, "focal must be positive");
  require(min_depth > 0.0 && max_depth >= min_depth, "invalid depth range");
  require(min_baseline >= 0.0 && max_baseline >= min_baseline,
          "invalid baseline range");
  require(max_rotation_deg >= 0.0 && max_rotation_deg <= 180.0,
          "invalid rotation range");
  require(pixel_noise >= 0.0 && depth_noise >= 0.0, "noise must be >= 0");
  require(outlier_fraction >= 0.0 && outlier_fraction < 1.0,
          "outlier_fraction must lie in [0, 1)");
  require(depth_bias > -1.0, "depth_bias must exceed -1");
  require(background_depth > 0.0, "background_depth must be positive");
  require(min_visible >= 1, "min_visible must be positive");
}

std::map<std::string, std::string> SyntheticSceneConfig::ToKeyValues() const {
  const auto num = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
  };
  return {{"num_scenes", std::to_string(num_scenes)},
          {"queries_per_scene", std::to_string(queries_per_scene)},
          {"num_points", std::to_string(num_points)},
          {"width", std::to_string(width)},
          {"height", std::to_string(height)},
          {"focal", num(focal)},
          {"min_depth", num(min_depth)},
          {"max_depth", num(max_depth)},
          {"min_baseline", num(min_baseline)},
          {"max_baseline", num(max_baseline)},
          {"max_rotation_deg", num(max_rotation_deg)},
          {"pixel_noise", num(pixel_noise)},
          {"outlier_fraction", num(outlier_fraction)},
          {"depth_noise", num(depth_noise)},
          {"depth_bias", num(depth_bias)},
          {"background_depth", num(background_depth)},
          {"min_visible", std::to_string(min_visible)},
          {"rng_seed", std::to_string(rng_seed)}};
}

SyntheticSceneConfig SyntheticSceneConfig::FromKeyValues(
    const std::map<std::string, std::string>& values) {
  SyntheticSceneConfig c;
  std::map<std::string, double*> doubles = {
      {"focal", &c.focal},
      {"min_depth", &c.min_depth},
      {"max_depth", &c.max_depth},
      {"min_baseline", &c.min_baseline},
      {"max_baseline", &c.max_baseline},
      {"max_rotation_deg", &c.max_rotation_deg},
      {"pixel_noise", &c.pixel_noise},
      {"outlier_fraction", &c.outlier_fraction},
      {"depth_noise", &c.depth_noise},
      {"depth_bias", &c.depth_bias},
      {"background_depth", &c.background_depth}};
  std::map<std::string, int*> ints = {
      {"num_scenes", &c.num_scenes}, {"queries_per_scene", &c.queries_per_scene},
      {"num_points", &c.num_points}, {"width", &c.width},
      {"height", &c.height},         {"min_visible", &c.min_visible}};
  for (const auto& [key, value] : values) {
    std::size_t used = 0;
    try {
      if (auto d = doubles.find(key); d != doubles.end()) {
        *d->second = std::stod(value, &used);
      } else if (auto i = ints.find(key); i != ints.end()) {
        *i->second = std::stoi(value, &used);
      } else if (key == "rng_seed" || key == "seed") {
        c.rng_seed = std::stoull(value, &used);
      } else {
        throw InvalidParameterError("synthetic config: unknown key '" + key +
                                    "'");
      }
    } catch (const std::logic_error&) {
      used = 0;
    }
    if (used != value.size()) {
      throw InvalidParameterError("synthetic config: invalid value for '" +
                                  key + "': " + value);
    }
  }
  c.Validate();
  return c;
}

SyntheticScene GenerateSyntheticScene(const SyntheticSceneConfig& config,
                                      const std::string& scene_id,
                                      std::uint64_t seed) {
  config.Validate();
  Rng rng(seed);
  SyntheticScene scene;
  scene.scene_id = scene_id;
  CameraIntrinsics k;
  k.fx = k.fy = config.focal;
  k.cx = 0.5 * config.width;
  k.cy = 0.5 * config.height;
  k.width = config.width;
  k.height = config.height;
  scene.k_ref = k;
  scene.depth_ref =
      DepthMap(k.width, k.height, static_cast<float>(config.background_depth));

  std::vector<char> ref_taken(scene.depth_ref.values.size(), 0);
  std::vector<ScenePoint> points;
  const int max_attempts = config.num_points * kPointAttemptsPerPoint;
  for (int attempt = 0;
       attempt < max_attempts &&
       static_cast<int>(points.size()) < config.num_points;
       ++attempt) {
    const Eigen::Vector2d px(rng.Uniform(0.0, k.width),
                             rng.Uniform(0.0, k.height));
    // Depths are float-representable so stored depth maps are exact.
    const double depth = static_cast<float>(
        rng.Uniform(config.min_depth, config.max_depth));
    const Eigen::Vector2d observed = Noisy(px, config.pixel_noise, rng);
    if (!k.Contains(observed)) continue;
    const int x = NearestPixel(observed.x(), k.width);
    const int y = NearestPixel(observed.y(), k.height);
    char& taken = ref_taken[static_cast<std::size_t>(y) * k.width + x];
    if (taken) continue;
    taken = 1;
    scene.depth_ref.at(x, y) = NoisyDepth(depth, config, rng);
    points.push_back({Backproject(k, px, depth), observed});
  }
  if (static_cast<int>(points.size()) < config.num_points) {
    throw Error("synthetic scene: could not place " +
                std::to_string(config.num_points) + " distinct points");
  }

  const double max_angle = config.max_rotation_deg * std::numbers::pi / 180.0;
  for (int qi = 0; qi < config.queries_per_scene; ++qi) {
    SyntheticQuery query;
    query.query_id = FormatId("query", qi);
    query.k = k;
    bool placed = false;
    for (int attempt = 0; attempt < kPoseAttempts && !placed; ++attempt) {
      const Eigen::Vector3d axis = RandomUnitVector(rng);
      const double angle = rng.Uniform(0.0, max_angle);
      const Eigen::Matrix3d r =
          Eigen::AngleAxisd(angle, axis).toRotationMatrix();
      const double baseline =
          rng.Uniform(config.min_baseline, config.max_baseline);
      const Eigen::Vector3d center = baseline * RandomUnitVector(rng);
      query.pose = Pose{Rotation(r), -(r * center)};

      query.depth = DepthMap(k.width, k.height,
                             static_cast<float>(config.background_depth));
      query.matches.clear();
      std::vector<char> taken(query.depth.values.size(), 0);
      for (const ScenePoint& p : points) {
        const Eigen::Vector3d xq = query.pose.Apply(p.position);
        if (!(xq.z() > 0.0)) continue;
        const Eigen::Vector2d observed =
            Noisy(Project(k, xq), config.pixel_noise, rng);
        if (!k.Contains(observed)) continue;
        const int x = NearestPixel(observed.x(), k.width);
        const int y = NearestPixel(observed.y(), k.height);
        char& t = taken[static_cast<std::size_t>(y) * k.width + x];
        if (t) continue;
        t = 1;
        query.depth.at(x, y) = NoisyDepth(xq.z(), config, rng);
        query.matches.push_back({p.ref_px, observed, 1.0});
      }
      placed = static_cast<int>(query.matches.size()) >= config.min_visible;
    }
    if (!placed) {
      throw Error("synthetic scene: no query pose with at least " +
                  std::to_string(config.min_visible) + " visible points");
    }

    const std::size_t n = query.matches.size();
    query.is_outlier.assign(n, 0);
    const std::size_t num_outliers = static_cast<std::size_t>(
        std::llround(config.outlier_fraction * static_cast<double>(n)));
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    for (std::size_t i = 0; i < num_outliers; ++i) {
      const std::size_t j = i + rng.UniformIndex(n - i);
      std::swap(order[i], order[j]);
      Correspondence& c = query.matches[order[i]];
      c.query_px = {rng.Uniform(0.0, k.width), rng.Uniform(0.0, k.height)};
      c.score = rng.Uniform();
      query.is_outlier[order[i]] = 1;
    }
    scene.queries.push_back(std::move(query));
  }
  return scene;
}

std::vector<SyntheticScene> GenerateSyntheticDataset(
    const SyntheticSceneConfig& config) {
  config.Validate();
  std::vector<SyntheticScene> scenes;
  for (int s = 0; s < config.num_scenes; ++s) {
    const std::string id = FormatId("scene", s);
    scenes.push_back(
        GenerateSyntheticScene(config, id, DeriveSeed(config.rng_seed, id, "")));
  }
  return scenes;
}

void WriteScene(const std::filesystem::path& root,
                const SyntheticScene& scene) {
  const std::filesystem::path dir = root / scene.scene_id;
  std::vector<IntrinsicsRecord> intrinsics = {{kReferenceFrame, scene.k_ref}};
  std::vector<PoseRecord> poses = {
      PoseRecord::FromPose(kReferenceFrame, Pose::Identity())};
  WriteDepthMap(dir / "depth" / (std::string(kReferenceFrame) + ".mfdm"),
                scene.depth_ref);
  for (const SyntheticQuery& q : scene.queries) {
    intrinsics.push_back({q.query_id, q.k});
    poses.push_back(PoseRecord::FromPose(q.query_id, q.pose));
    WriteDepthMap(dir / "depth" / (q.query_id + ".mfdm"), q.depth);
    WriteCorrespondences(dir / "matches" / (q.query_id + ".txt"), q.matches);
  }
  WriteIntrinsics(dir / "intrinsics.txt", intrinsics);
  WritePoses(dir / "poses.txt", poses);
}

}  // namespace mapfree

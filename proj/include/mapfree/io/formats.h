#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "mapfree/data.h"
#include "mapfree/geometry/camera.h"
#include "mapfree/geometry/pose.h"
#include "mapfree/geometry/rotation.h"
#include "mapfree/pipelines/estimators.h"

namespace mapfree {

// Text formats are whitespace separated, one record per line. Blank lines
// and lines starting with '#' are ignored. Numbers are written with 17
// significant digits so that write -> read -> write is byte-identical.
// Parse errors are FormatError carrying the path and 1-based line.

// `frame qw qx qy qz tx ty tz`, world-to-camera (x = R y + t), meters.
// The quaternion is kept as written; ToPose() normalizes it.
struct PoseRecord {
  std::string frame;
  Quaternion q;
  Eigen::Vector3d t = Eigen::Vector3d::Zero();
  std::size_t line = 0;  // source line when parsed, 0 otherwise

  Pose ToPose() const;
  static PoseRecord FromPose(std::string frame, const Pose& pose);
};

// Quaternions whose norm differs from one by more than this are rejected.
inline constexpr double kQuaternionNormTolerance = 1e-3;

std::vector<PoseRecord> ParsePoses(std::string_view text,
                                   const std::string& source);
std::string FormatPoses(const std::vector<PoseRecord>& poses);
std::vector<PoseRecord> ReadPoses(const std::filesystem::path& path);
void WritePoses(const std::filesystem::path& path,
                const std::vector<PoseRecord>& poses);

// `frame fx fy cx cy width height`.
struct IntrinsicsRecord {
  std::string frame;
  CameraIntrinsics k;
};

std::vector<IntrinsicsRecord> ParseIntrinsics(std::string_view text,
                                              const std::string& source);
std::string FormatIntrinsics(const std::vector<IntrinsicsRecord>& records);
std::vector<IntrinsicsRecord> ReadIntrinsics(const std::filesystem::path& path);
void WriteIntrinsics(const std::filesystem::path& path,
                     const std::vector<IntrinsicsRecord>& records);

// Binary depth map: "MFDM", u32 width, u32 height, then width*height
// little-endian float32 meters, row-major. Errors report byte offsets.
std::string EncodeDepthMap(const DepthMap& depth);
DepthMap DecodeDepthMap(std::string_view bytes, const std::string& source);
DepthMap ReadDepthMap(const std::filesystem::path& path);
// Additionally rejects a map whose size differs from `k`.
DepthMap ReadDepthMap(const std::filesystem::path& path,
                      const CameraIntrinsics& k);
void WriteDepthMap(const std::filesystem::path& path, const DepthMap& depth);

// `u_ref v_ref u_query v_query score`. When intrinsics are given, pixels
// outside 0 <= u < width, 0 <= v < height are rejected.
CorrespondenceSet ParseCorrespondences(
    std::string_view text, const std::string& source,
    const CameraIntrinsics* k_ref = nullptr,
    const CameraIntrinsics* k_query = nullptr);
std::string FormatCorrespondences(const CorrespondenceSet& matches);
CorrespondenceSet ReadCorrespondences(
    const std::filesystem::path& path, const CameraIntrinsics* k_ref = nullptr,
    const CameraIntrinsics* k_query = nullptr);
void WriteCorrespondences(const std::filesystem::path& path,
                          const CorrespondenceSet& matches);

// `scene_id query_id status qw qx qy qz tx ty tz confidence`. Missing
// values (pose of a non-ok estimate, absent confidence) are written "nan".
struct EstimateLine {
  std::string scene_id;
  std::string query_id;
  EstimateStatus status = EstimateStatus::kNoEstimate;
  std::optional<Quaternion> q;
  std::optional<Eigen::Vector3d> t;
  std::optional<double> confidence;

  static EstimateLine FromEstimate(std::string scene_id, std::string query_id,
                                   const PoseEstimate& estimate);
  PoseEstimate ToEstimate() const;
};

std::vector<EstimateLine> ParseEstimates(std::string_view text,
                                         const std::string& source);
std::string FormatEstimates(const std::vector<EstimateLine>& lines);
std::vector<EstimateLine> ReadEstimates(const std::filesystem::path& path);
void WriteEstimates(const std::filesystem::path& path,
                    const std::vector<EstimateLine>& lines);

// `key = value` or `key value` lines; later keys override earlier ones.
std::map<std::string, std::string> ParseKeyValues(std::string_view text,
                                                  const std::string& source);
std::map<std::string, std::string> ReadKeyValues(
    const std::filesystem::path& path);

std::string ReadFile(const std::filesystem::path& path);
void WriteFile(const std::filesystem::path& path, std::string_view content);

}  // namespace mapfree

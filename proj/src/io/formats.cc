#include "mapfree/io/formats.h"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

#include "mapfree/error.h"

namespace mapfree {
namespace {

constexpr char kDepthMagic[4] = {'M', 'F', 'D', 'M'};
constexpr std::size_t kDepthHeaderSize = 12;

std::vector<std::string_view> Tokenize(std::string_view line) {
  std::vector<std::string_view> tokens;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i])))
      ++i;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j])))
      ++j;
    if (j > i) tokens.push_back(line.substr(i, j - i));
    i = j;
  }
  return tokens;
}

// Calls fn(tokens, line_number) for every non-blank, non-comment line.
template <typename Fn>
void ForEachRecord(std::string_view text, Fn&& fn) {
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    ++line_no;
    std::string_view line = text.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    const std::vector<std::string_view> tokens = Tokenize(line);
    if (!tokens.empty() && tokens[0][0] != '#') fn(tokens, line_no);
    if (end == text.size()) break;
    pos = end + 1;
  }
}

double ParseNumber(std::string_view token, const std::string& source,
                   std::size_t line, const char* field, bool allow_nan) {
  double value = 0.0;
  const char* first = token.data();
  const char* last = token.data() + token.size();
  if (first != last && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) {
    throw FormatError(source, line,
                      std::string("invalid number for ") + field + ": '" +
                          std::string(token) + "'");
  }
  if (std::isnan(value) ? !allow_nan : std::isinf(value)) {
    throw FormatError(source, line,
                      std::string("non-finite value for ") + field);
  }
  return value;
}

int ParseInt(std::string_view token, const std::string& source,
             std::size_t line, const char* field) {
  int value = 0;
  const auto [ptr, ec] =
      std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size()) {
    throw FormatError(source, line,
                      std::string("invalid integer for ") + field + ": '" +
                          std::string(token) + "'");
  }
  return value;
}

void ExpectFields(const std::vector<std::string_view>& tokens,
                  std::size_t count, const std::string& source,
                  std::size_t line, const char* format) {
  if (tokens.size() != count) {
    throw FormatError(source, line,
                      "expected " + std::to_string(count) + " fields (" +
                          format + "), got " + std::to_string(tokens.size()));
  }
}

std::string Num(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string NumOrNan(const std::optional<double>& v) {
  return v ? Num(*v) : std::string("nan");
}

void CheckUniqueFrame(std::set<std::string>& seen, std::string_view frame,
                      const std::string& source, std::size_t line) {
  if (!seen.insert(std::string(frame)).second) {
    throw FormatError(source, line,
                      "duplicate frame '" + std::string(frame) + "'");
  }
}

void PutU32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint32_t GetU32(std::string_view bytes, std::size_t offset) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) {
    v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[offset + i]))
         << (8 * i);
  }
  return v;
}

}  // namespace

std::string ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("failed reading " + path.string());
  return ss.str();
}

void WriteFile(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

// Poses.

Pose PoseRecord::ToPose() const {
  return {RotationFromQuaternion(q), t};
}

PoseRecord PoseRecord::FromPose(std::string frame, const Pose& pose) {
  PoseRecord r;
  r.frame = std::move(frame);
  r.q = QuaternionFromRotation(pose.rotation);
  r.t = pose.translation;
  return r;
}

std::vector<PoseRecord> ParsePoses(std::string_view text,
                                   const std::string& source) {
  std::vector<PoseRecord> poses;
  std::set<std::string> seen;
  ForEachRecord(text, [&](const std::vector<std::string_view>& tok,
                          std::size_t line) {
    ExpectFields(tok, 8, source, line, "frame qw qx qy qz tx ty tz");
    CheckUniqueFrame(seen, tok[0], source, line);
    PoseRecord r;
    r.frame = std::string(tok[0]);
    r.line = line;
    r.q.w = ParseNumber(tok[1], source, line, "qw", false);
    r.q.x = ParseNumber(tok[2], source, line, "qx", false);
    r.q.y = ParseNumber(tok[3], source, line, "qy", false);
    r.q.z = ParseNumber(tok[4], source, line, "qz", false);
    for (int i = 0; i < 3; ++i) {
      r.t(i) = ParseNumber(tok[5 + i], source, line, "translation", false);
    }
    const double norm = r.q.Norm();
    if (std::abs(norm - 1.0) > kQuaternionNormTolerance) {
      throw FormatError(source, line,
                        "quaternion norm " + Num(norm) + " is not unit");
    }
    poses.push_back(std::move(r));
  });
  return poses;
}

std::string FormatPoses(const std::vector<PoseRecord>& poses) {
  std::string out;
  for (const PoseRecord& r : poses) {
    out += r.frame + ' ' + Num(r.q.w) + ' ' + Num(r.q.x) + ' ' + Num(r.q.y) +
           ' ' + Num(r.q.z) + ' ' + Num(r.t.x()) + ' ' + Num(r.t.y()) + ' ' +
           Num(r.t.z()) + '\n';
  }
  return out;
}

std::vector<PoseRecord> ReadPoses(const std::filesystem::path& path) {
  return ParsePoses(ReadFile(path), path.string());
}

void WritePoses(const std::filesystem::path& path,
                const std::vector<PoseRecord>& poses) {
  WriteFile(path, FormatPoses(poses));
}

// Intrinsics.

std::vector<IntrinsicsRecord> ParseIntrinsics(std::string_view text,
                                              const std::string& source) {
  std::vector<IntrinsicsRecord> records;
  std::set<std::string> seen;
  ForEachRecord(text, [&](const std::vector<std::string_view>& tok,
                          std::size_t line) {
    ExpectFields(tok, 7, source, line, "frame fx fy cx cy width height");
    CheckUniqueFrame(seen, tok[0], source, line);
    IntrinsicsRecord r;
    r.frame = std::string(tok[0]);
    r.k.fx = ParseNumber(tok[1], source, line, "fx", false);
    r.k.fy = ParseNumber(tok[2], source, line, "fy", false);
    r.k.cx = ParseNumber(tok[3], source, line, "cx", false);
    r.k.cy = ParseNumber(tok[4], source, line, "cy", false);
    r.k.width = ParseInt(tok[5], source, line, "width");
    r.k.height = ParseInt(tok[6], source, line, "height");
    try {
      r.k.Validate();
    } catch (const InvalidParameterError& e) {
      throw FormatError(source, line, e.what());
    }
    records.push_back(std::move(r));
  });
  return records;
}

std::string FormatIntrinsics(const std::vector<IntrinsicsRecord>& records) {
  std::string out;
  for (const IntrinsicsRecord& r : records) {
    out += r.frame + ' ' + Num(r.k.fx) + ' ' + Num(r.k.fy) + ' ' +
           Num(r.k.cx) + ' ' + Num(r.k.cy) + ' ' + std::to_string(r.k.width) +
           ' ' + std::to_string(r.k.height) + '\n';
  }
  return out;
}

std::vector<IntrinsicsRecord> ReadIntrinsics(const std::filesystem::path& path) {
  return ParseIntrinsics(ReadFile(path), path.string());
}

void WriteIntrinsics(const std::filesystem::path& path,
                     const std::vector<IntrinsicsRecord>& records) {
  WriteFile(path, FormatIntrinsics(records));
}

// Depth maps.

std::string EncodeDepthMap(const DepthMap& depth) {
  if (depth.width < 0 || depth.height < 0 ||
      depth.values.size() != static_cast<std::size_t>(depth.width) *
                                 static_cast<std::size_t>(depth.height)) {
    throw InvalidParameterError("depth map size does not match its values");
  }
  std::string out(kDepthMagic, sizeof(kDepthMagic));
  PutU32(out, static_cast<std::uint32_t>(depth.width));
  PutU32(out, static_cast<std::uint32_t>(depth.height));
  out.reserve(out.size() + depth.values.size() * 4);
  for (const float v : depth.values) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, sizeof(bits));
    PutU32(out, bits);
  }
  return out;
}

DepthMap DecodeDepthMap(std::string_view bytes, const std::string& source) {
  if (bytes.size() < kDepthHeaderSize) {
    throw FormatError(source, 0, "truncated depth header (" +
                                     std::to_string(bytes.size()) + " bytes)");
  }
  if (std::memcmp(bytes.data(), kDepthMagic, sizeof(kDepthMagic)) != 0) {
    throw FormatError(source, 0, "bad magic, expected MFDM");
  }
  const std::uint32_t w = GetU32(bytes, 4);
  const std::uint32_t h = GetU32(bytes, 8);
  if (w > 1u << 16 || h > 1u << 16) {
    throw FormatError(source, 4, "implausible depth map size");
  }
  const std::size_t count = static_cast<std::size_t>(w) * h;
  const std::size_t expected = kDepthHeaderSize + 4 * count;
  if (bytes.size() < expected) {
    throw FormatError(source, bytes.size(),
                      "truncated depth payload: expected " +
                          std::to_string(expected) + " bytes, got " +
                          std::to_string(bytes.size()));
  }
  if (bytes.size() > expected) {
    throw FormatError(source, expected, "trailing bytes after depth payload");
  }
  DepthMap depth;
  depth.width = static_cast<int>(w);
  depth.height = static_cast<int>(h);
  depth.values.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::uint32_t bits = GetU32(bytes, kDepthHeaderSize + 4 * i);
    std::memcpy(&depth.values[i], &bits, sizeof(bits));
  }
  return depth;
}

DepthMap ReadDepthMap(const std::filesystem::path& path) {
  return DecodeDepthMap(ReadFile(path), path.string());
}

DepthMap ReadDepthMap(const std::filesystem::path& path,
                      const CameraIntrinsics& k) {
  DepthMap depth = ReadDepthMap(path);
  if (depth.width != k.width || depth.height != k.height) {
    throw FormatError(path.string(), 4,
                      "depth map is " + std::to_string(depth.width) + "x" +
                          std::to_string(depth.height) +
                          " but the image is " + std::to_string(k.width) +
                          "x" + std::to_string(k.height));
  }
  return depth;
}

void WriteDepthMap(const std::filesystem::path& path, const DepthMap& depth) {
  WriteFile(path, EncodeDepthMap(depth));
}

// Correspondences.

CorrespondenceSet ParseCorrespondences(std::string_view text,
                                       const std::string& source,
                                       const CameraIntrinsics* k_ref,
                                       const CameraIntrinsics* k_query) {
  CorrespondenceSet matches;
  ForEachRecord(text, [&](const std::vector<std::string_view>& tok,
                          std::size_t line) {
    ExpectFields(tok, 5, source, line, "u_ref v_ref u_query v_query score");
    Correspondence c;
    c.ref_px = {ParseNumber(tok[0], source, line, "u_ref", false),
                ParseNumber(tok[1], source, line, "v_ref", false)};
    c.query_px = {ParseNumber(tok[2], source, line, "u_query", false),
                  ParseNumber(tok[3], source, line, "v_query", false)};
    c.score = ParseNumber(tok[4], source, line, "score", false);
    if (c.score < 0.0 || c.score > 1.0) {
      throw FormatError(source, line, "score outside [0, 1]");
    }
    if (k_ref && !k_ref->Contains(c.ref_px)) {
      throw FormatError(source, line, "reference pixel outside the image");
    }
    if (k_query && !k_query->Contains(c.query_px)) {
      throw FormatError(source, line, "query pixel outside the image");
    }
    matches.push_back(c);
  });
  return matches;
}

std::string FormatCorrespondences(const CorrespondenceSet& matches) {
  std::string out;
  for (const Correspondence& c : matches) {
    out += Num(c.ref_px.x()) + ' ' + Num(c.ref_px.y()) + ' ' +
           Num(c.query_px.x()) + ' ' + Num(c.query_px.y()) + ' ' +
           Num(c.score) + '\n';
  }
  return out;
}

CorrespondenceSet ReadCorrespondences(const std::filesystem::path& path,
                                      const CameraIntrinsics* k_ref,
                                      const CameraIntrinsics* k_query) {
  return ParseCorrespondences(ReadFile(path), path.string(), k_ref, k_query);
}

void WriteCorrespondences(const std::filesystem::path& path,
                          const CorrespondenceSet& matches) {
  WriteFile(path, FormatCorrespondences(matches));
}

// Estimates.

EstimateLine EstimateLine::FromEstimate(std::string scene_id,
                                        std::string query_id,
                                        const PoseEstimate& estimate) {
  EstimateLine line;
  line.scene_id = std::move(scene_id);
  line.query_id = std::move(query_id);
  line.status = estimate.status;
  if (estimate.status == EstimateStatus::kOk && estimate.pose) {
    line.q = QuaternionFromRotation(estimate.pose->rotation);
    line.t = estimate.pose->translation;
  } else if (estimate.status == EstimateStatus::kOk) {
    line.status = EstimateStatus::kNoEstimate;
  }
  line.confidence = estimate.confidence;
  return line;
}

PoseEstimate EstimateLine::ToEstimate() const {
  PoseEstimate e;
  e.status = status;
  if (status == EstimateStatus::kOk && q && t) {
    e.pose = Pose{RotationFromQuaternion(*q), *t};
  }
  e.confidence = confidence;
  return e;
}

std::vector<EstimateLine> ParseEstimates(std::string_view text,
                                         const std::string& source) {
  std::vector<EstimateLine> lines;
  std::set<std::pair<std::string, std::string>> seen;
  ForEachRecord(text, [&](const std::vector<std::string_view>& tok,
                          std::size_t line) {
    ExpectFields(tok, 11, source, line,
                 "scene_id query_id status qw qx qy qz tx ty tz confidence");
    EstimateLine e;
    e.scene_id = std::string(tok[0]);
    e.query_id = std::string(tok[1]);
    if (!seen.insert({e.scene_id, e.query_id}).second) {
      throw FormatError(source, line, "duplicate estimate for " + e.scene_id +
                                          "/" + e.query_id);
    }
    try {
      e.status = ParseEstimateStatus(tok[2]);
    } catch (const InvalidParameterError& err) {
      throw FormatError(source, line, err.what());
    }
    double v[7];
    for (int i = 0; i < 7; ++i) {
      v[i] = ParseNumber(tok[3 + i], source, line, "pose", true);
    }
    const double conf = ParseNumber(tok[10], source, line, "confidence", true);
    if (!std::isnan(conf)) {
      if (conf < 0.0) {
        throw FormatError(source, line, "negative confidence");
      }
      e.confidence = conf;
    }
    bool any_nan = false;
    for (const double x : v) any_nan |= std::isnan(x);
    if (e.status == EstimateStatus::kOk) {
      if (any_nan) {
        throw FormatError(source, line, "ok estimate with missing pose");
      }
      e.q = Quaternion{v[0], v[1], v[2], v[3]};
      if (std::abs(e.q->Norm() - 1.0) > kQuaternionNormTolerance) {
        throw FormatError(source, line, "quaternion is not unit");
      }
      e.t = Eigen::Vector3d(v[4], v[5], v[6]);
    }
    lines.push_back(std::move(e));
  });
  return lines;
}

std::string FormatEstimates(const std::vector<EstimateLine>& lines) {
  std::string out;
  for (const EstimateLine& e : lines) {
    out += e.scene_id + ' ' + e.query_id + ' ' + std::string(ToString(e.status));
    if (e.q && e.t) {
      out += ' ' + Num(e.q->w) + ' ' + Num(e.q->x) + ' ' + Num(e.q->y) + ' ' +
             Num(e.q->z) + ' ' + Num(e.t->x()) + ' ' + Num(e.t->y()) + ' ' +
             Num(e.t->z());
    } else {
      out += " nan nan nan nan nan nan nan";
    }
    out += ' ' + NumOrNan(e.confidence) + '\n';
  }
  return out;
}

std::vector<EstimateLine> ReadEstimates(const std::filesystem::path& path) {
  return ParseEstimates(ReadFile(path), path.string());
}

void WriteEstimates(const std::filesystem::path& path,
                    const std::vector<EstimateLine>& lines) {
  WriteFile(path, FormatEstimates(lines));
}

// Key-value config.

std::map<std::string, std::string> ParseKeyValues(std::string_view text,
                                                  const std::string& source) {
  std::map<std::string, std::string> values;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    ++line_no;
    std::string line(text.substr(pos, end - pos));
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    const auto trim = [](std::string s) {
      const char* ws = " \t\r";
      const std::size_t b = s.find_first_not_of(ws);
      if (b == std::string::npos) return std::string();
      return s.substr(b, s.find_last_not_of(ws) - b + 1);
    };
    line = trim(line);
    if (!line.empty()) {
      std::size_t split = line.find('=');
      if (split == std::string::npos) split = line.find_first_of(" \t");
      if (split == std::string::npos) {
        throw FormatError(source, line_no, "expected 'key = value'");
      }
      const std::string key = trim(line.substr(0, split));
      const std::string value = trim(line.substr(split + 1));
      if (key.empty() || value.empty()) {
        throw FormatError(source, line_no, "expected 'key = value'");
      }
      values[key] = value;
    }
    if (end == text.size()) break;
    pos = end + 1;
  }
  return values;
}

std::map<std::string, std::string> ReadKeyValues(
    const std::filesystem::path& path) {
  return ParseKeyValues(ReadFile(path), path.string());
}

}  // namespace mapfree

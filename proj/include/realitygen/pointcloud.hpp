#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace realitygen {

enum class FormatTag {
  Kitti4,     // x, y, z, intensity as little-endian float32
  Nuscenes5,  // x, y, z, intensity, ring as little-endian float32
};

/// Bytes per point record on disk.
constexpr std::size_t record_size(FormatTag tag) {
  return tag == FormatTag::Kitti4 ? 16 : 20;
}

struct Point {
  float x = 0.f;
  float y = 0.f;
  float z = 0.f;
  float intensity = 0.f;  // stored value, not normalized
  std::optional<std::uint16_t> ring;
  std::optional<std::uint32_t> label;  // raw SemanticKITTI label word

  double range() const {
    return std::sqrt(double(x) * x + double(y) * y + double(z) * z);
  }

  /// Semantic class id (lower 16 bits of the label word).
  std::optional<std::uint32_t> semantic_class() const {
    if (!label) return std::nullopt;
    return *label & 0xFFFFu;
  }

  bool operator==(const Point&) const = default;
};

/// One LiDAR sweep in source order.
struct PointCloud {
  std::vector<Point> points;
  FormatTag format = FormatTag::Kitti4;
  std::string source_path;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }

  bool operator==(const PointCloud& other) const {
    return format == other.format && points == other.points;
  }
};

}  // namespace realitygen

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "realitygen/material.hpp"
#include "realitygen/pointcloud.hpp"

namespace realitygen::projection {

struct SensorProfile {
  int channels = 64;
  double fov_up_deg = 2.0;
  double fov_down_deg = -24.8;
  int width = 1048;
  double max_range = 120.0;
  // Divisor mapping stored intensity to [0, 1] (1 for KITTI, 255 for nuScenes).
  double intensity_scale = 1.0;

  /// HDL-64E geometry used by SemanticKITTI.
  static SensorProfile hdl64();
  /// 32-beam nuScenes geometry, projected natively at 32 x 1048.
  static SensorProfile nuscenes32();
  /// "hdl64" / "kitti" / "nuscenes32" / "nuscenes".
  static SensorProfile by_name(const std::string& name);

  /// Throws Error{InvalidArgument} when the profile is degenerate.
  void validate() const;

  bool operator==(const SensorProfile&) const = default;
};

enum class Channel : int { Range = 0, Incidence = 1, Reflectance = 2, Intensity = 3, Mask = 4 };
inline constexpr int kChannelCount = 5;

/// Weather conditioning planes, in plane order.
enum class WeatherStyle : int { Rain = 0, Snow = 1 };
inline constexpr int kWeatherStyleCount = 2;

struct Pixel {
  int row = 0;
  int col = 0;
  bool operator==(const Pixel&) const = default;
};

/// Spherical projection of a sweep: channel-major float planes, each value in
/// [0, 1], plus the index of the point that owns every occupied pixel.
class RangeImage {
 public:
  /// Zero-sized image with no channels.
  RangeImage() {
    profile_.channels = 0;
    profile_.width = 0;
  }
  explicit RangeImage(const SensorProfile& profile);

  int height() const { return profile_.channels; }
  int width() const { return profile_.width; }
  const SensorProfile& profile() const { return profile_; }
  std::size_t pixel_count() const { return std::size_t(height()) * width(); }

  float at(Channel c, int row, int col) const { return data_[offset(c, row, col)]; }
  float& at(Channel c, int row, int col) { return data_[offset(c, row, col)]; }

  std::span<const float> plane(Channel c) const {
    return {data_.data() + std::size_t(static_cast<int>(c)) * pixel_count(), pixel_count()};
  }
  std::span<float> plane(Channel c) {
    return {data_.data() + std::size_t(static_cast<int>(c)) * pixel_count(), pixel_count()};
  }
  std::span<const float> data() const { return data_; }

  bool occupied(int row, int col) const { return at(Channel::Mask, row, col) != 0.f; }
  std::size_t occupied_count() const;

  // -1 marks an empty pixel.
  std::int32_t point_index(int row, int col) const {
    return pixel_to_point_[std::size_t(row) * width() + col];
  }
  std::span<const std::int32_t> pixel_to_point() const { return pixel_to_point_; }
  std::span<std::int32_t> pixel_to_point() { return pixel_to_point_; }

  /// Empties a pixel: mask, every channel and the point index are cleared.
  void clear_pixel(int row, int col);

  /// Points that fell outside the vertical field of view.
  std::size_t unprojected_count() const { return unprojected_; }
  void set_unprojected_count(std::size_t n) { unprojected_ = n; }

  /// Constant one-hot planes for weather conditioning; empty when unset.
  const std::vector<float>& weather_onehot() const { return weather_onehot_; }
  void set_weather_style(WeatherStyle style);
  void clear_weather_style() { weather_onehot_.clear(); }

  bool same_shape(const RangeImage& other) const {
    return height() == other.height() && width() == other.width();
  }

 private:
  std::size_t offset(Channel c, int row, int col) const {
    return std::size_t(static_cast<int>(c)) * pixel_count() + std::size_t(row) * width() + col;
  }

  SensorProfile profile_;
  std::vector<float> data_;
  std::vector<std::int32_t> pixel_to_point_;
  std::vector<float> weather_onehot_;
  std::size_t unprojected_ = 0;
};

/// Pixel a point lands in, or nullopt when its elevation is outside the FOV.
std::optional<Pixel> pixel_for(const Point& point, const SensorProfile& profile);

/// Normalized intensity in [0, 1] for a stored value.
float normalize_intensity(float stored, const SensorProfile& profile);
/// Normalized range channel value min(r, max_range) / max_range.
float normalize_range(double range, const SensorProfile& profile);

/// Projects a sweep. Collisions keep the nearer point (lower index on exact
/// ties). The reflectance channel comes from `materials` when points carry
/// labels, otherwise from the stored-intensity * range proxy. The incidence
/// channel is left at 0 until compute_incidence runs.
RangeImage project(const PointCloud& cloud, const SensorProfile& profile,
                   const physics::MaterialTable* materials = nullptr);

enum class UnprojectedPolicy { Keep, Drop };

/// Writes image values back to point order. A point owned by a pixel takes
/// that pixel's intensity and, when the range channel differs from the
/// projected value, is moved along its beam to the new range. Fields whose
/// channel still equals the projected value are copied unchanged. Points not
/// owned by any pixel are kept or dropped per `policy`.
/// Throws Error{IndexMismatch} when indices do not fit the cloud.
PointCloud unproject(const RangeImage& image, const PointCloud& cloud,
                     UnprojectedPolicy policy = UnprojectedPolicy::Keep);

inline constexpr float kMinCosIncidence = 1e-3f;

/// Fills the incidence channel with cos(theta) in [1e-3, 1] from range-image
/// neighbour normals. Pixels without a usable horizontal and vertical
/// neighbour get cos(theta) = 1.
RangeImage compute_incidence(const PointCloud& cloud, RangeImage image);

/// Debug dump: height, width, plane count (little-endian uint32), then
/// row-major float32 planes (the five channels followed by any weather
/// planes broadcast to full resolution).
std::vector<std::byte> dump_bytes(const RangeImage& image);
void write_dump(const RangeImage& image, const std::filesystem::path& path);

struct DumpedImage {
  std::uint32_t height = 0;
  std::uint32_t width = 0;
  std::uint32_t planes = 0;
  std::vector<float> values;
};
DumpedImage read_dump(const std::filesystem::path& path);

}  // namespace realitygen::projection

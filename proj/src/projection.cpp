#include "realitygen/projection.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <limits>
#include <numbers>

#include "realitygen/error.hpp"
#include "realitygen/io.hpp"

namespace realitygen::projection {
namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

struct Vec3 {
  double x, y, z;
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
  Vec3 cross(const Vec3& o) const {
    return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
  }
  double norm() const { return std::sqrt(dot(*this)); }
};

Vec3 position(const Point& p) { return {p.x, p.y, p.z}; }

void append_u32(std::vector<std::byte>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(std::byte((v >> (8 * i)) & 0xFFu));
}

std::uint32_t read_u32(const std::byte* p) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= std::uint32_t(p[i]) << (8 * i);
  return v;
}

}  // namespace

SensorProfile SensorProfile::hdl64() { return SensorProfile{}; }

SensorProfile SensorProfile::nuscenes32() {
  SensorProfile p;
  p.channels = 32;
  p.fov_up_deg = 10.67;
  p.fov_down_deg = -30.67;
  p.width = 1048;
  p.max_range = 100.0;
  p.intensity_scale = 255.0;
  return p;
}

SensorProfile SensorProfile::by_name(const std::string& name) {
  if (name == "hdl64" || name == "kitti" || name == "semantickitti") return hdl64();
  if (name == "nuscenes32" || name == "nuscenes") return nuscenes32();
  throw Error(ErrorKind::InvalidArgument, "unknown sensor profile '" + name + "'");
}

void SensorProfile::validate() const {
  if (channels < 1 || width < 1) throw Error(ErrorKind::InvalidArgument, "profile size < 1");
  if (!(fov_up_deg > fov_down_deg)) throw Error(ErrorKind::InvalidArgument, "fov_up <= fov_down");
  if (!(max_range > 0.0)) throw Error(ErrorKind::InvalidArgument, "max_range must be > 0");
  if (!(intensity_scale > 0.0)) throw Error(ErrorKind::InvalidArgument, "intensity_scale must be > 0");
}

RangeImage::RangeImage(const SensorProfile& profile)
    : profile_(profile),
      data_(std::size_t(kChannelCount) * profile.channels * profile.width, 0.f),
      pixel_to_point_(std::size_t(profile.channels) * profile.width, -1) {
  profile_.validate();
}

std::size_t RangeImage::occupied_count() const {
  auto mask = plane(Channel::Mask);
  return std::size_t(std::count_if(mask.begin(), mask.end(), [](float m) { return m != 0.f; }));
}

void RangeImage::clear_pixel(int row, int col) {
  for (int c = 0; c < kChannelCount; ++c) at(Channel(c), row, col) = 0.f;
  pixel_to_point_[std::size_t(row) * width() + col] = -1;
}

void RangeImage::set_weather_style(WeatherStyle style) {
  weather_onehot_.assign(kWeatherStyleCount, 0.f);
  weather_onehot_[static_cast<int>(style)] = 1.f;
}

std::optional<Pixel> pixel_for(const Point& point, const SensorProfile& profile) {
  const double r = point.range();
  if (!(r > 0.0)) return std::nullopt;
  const double up = profile.fov_up_deg * kDegToRad;
  const double down = profile.fov_down_deg * kDegToRad;
  const double elevation = std::asin(std::clamp(double(point.z) / r, -1.0, 1.0));
  if (elevation > up || elevation < down) return std::nullopt;

  const double azimuth = std::atan2(double(point.y), double(point.x));
  const double h = profile.channels;
  const double w = profile.width;
  int row = int(std::floor((1.0 - (elevation - down) / (up - down)) * h));
  int col = int(std::floor(0.5 * (1.0 - azimuth / std::numbers::pi) * w));
  row = std::clamp(row, 0, profile.channels - 1);
  col = std::clamp(col, 0, profile.width - 1);
  return Pixel{row, col};
}

float normalize_intensity(float stored, const SensorProfile& profile) {
  return float(std::clamp(double(stored) / profile.intensity_scale, 0.0, 1.0));
}

float normalize_range(double range, const SensorProfile& profile) {
  return float(std::min(range, profile.max_range) / profile.max_range);
}

RangeImage project(const PointCloud& cloud, const SensorProfile& profile,
                   const physics::MaterialTable* materials) {
  RangeImage image(profile);
  std::vector<double> nearest(image.pixel_count(), std::numeric_limits<double>::infinity());
  auto owners = image.pixel_to_point();
  std::size_t outside = 0;

  for (std::size_t i = 0; i < cloud.points.size(); ++i) {
    auto pixel = pixel_for(cloud.points[i], profile);
    if (!pixel) {
      ++outside;
      continue;
    }
    const std::size_t k = std::size_t(pixel->row) * profile.width + pixel->col;
    const double r = cloud.points[i].range();
    if (r < nearest[k]) {  // strict: the lower index keeps exact ties
      nearest[k] = r;
      owners[k] = std::int32_t(i);
    }
  }
  image.set_unprojected_count(outside);

  for (int row = 0; row < image.height(); ++row) {
    for (int col = 0; col < image.width(); ++col) {
      const std::int32_t idx = image.point_index(row, col);
      if (idx < 0) continue;
      const Point& p = cloud.points[std::size_t(idx)];
      const double r = p.range();
      const float intensity = normalize_intensity(p.intensity, profile);
      float reflectance;
      if (materials != nullptr && p.semantic_class()) {
        reflectance = float(materials->lookup(*p.semantic_class()));
      } else {
        reflectance = float(std::min(1.0, double(intensity) * r));
      }
      image.at(Channel::Range, row, col) = normalize_range(r, profile);
      image.at(Channel::Reflectance, row, col) = reflectance;
      image.at(Channel::Intensity, row, col) = intensity;
      image.at(Channel::Mask, row, col) = 1.f;
    }
  }
  return image;
}

namespace {

// Point index -> flat pixel index of the pixel it owns, or -1.
std::vector<std::int64_t> owned_pixels(const RangeImage& image, const PointCloud& cloud) {
  std::vector<std::int64_t> owned(cloud.points.size(), -1);
  const auto owners = image.pixel_to_point();
  for (std::size_t k = 0; k < owners.size(); ++k) {
    const std::int32_t idx = owners[k];
    if (idx < 0) continue;
    if (std::size_t(idx) >= cloud.points.size()) {
      throw Error(ErrorKind::IndexMismatch, "pixel references point " + std::to_string(idx) +
                                                " of a " + std::to_string(cloud.size()) +
                                                "-point cloud");
    }
    const Pixel expected{int(k / std::size_t(image.width())), int(k % std::size_t(image.width()))};
    if (pixel_for(cloud.points[std::size_t(idx)], image.profile()) != expected ||
        owned[std::size_t(idx)] >= 0) {
      throw Error(ErrorKind::IndexMismatch,
                  "point " + std::to_string(idx) + " does not belong to its pixel");
    }
    owned[std::size_t(idx)] = std::int64_t(k);
  }
  return owned;
}

}  // namespace

PointCloud unproject(const RangeImage& image, const PointCloud& cloud, UnprojectedPolicy policy) {
  const auto owned = owned_pixels(image, cloud);
  const SensorProfile& profile = image.profile();
  const auto range_plane = image.plane(Channel::Range);
  const auto intensity_plane = image.plane(Channel::Intensity);

  PointCloud out;
  out.format = cloud.format;
  out.source_path = cloud.source_path;
  out.points.reserve(cloud.points.size());
  for (std::size_t i = 0; i < cloud.points.size(); ++i) {
    Point p = cloud.points[i];
    if (owned[i] < 0) {
      if (policy == UnprojectedPolicy::Keep) out.points.push_back(p);
      continue;
    }
    const std::size_t k = std::size_t(owned[i]);
    const float intensity = intensity_plane[k];
    if (intensity != normalize_intensity(p.intensity, profile)) {
      p.intensity = float(double(intensity) * profile.intensity_scale);
    }
    const double r = p.range();
    const float range = range_plane[k];
    if (range != normalize_range(r, profile)) {
      const double scale = double(range) * profile.max_range / r;
      p.x = float(p.x * scale);
      p.y = float(p.y * scale);
      p.z = float(p.z * scale);
    }
    out.points.push_back(p);
  }
  return out;
}

RangeImage compute_incidence(const PointCloud& cloud, RangeImage image) {
  const int h = image.height();
  const int w = image.width();
  owned_pixels(image, cloud);  // throws IndexMismatch

  auto position_at = [&](int row, int col) -> std::optional<Vec3> {
    if (row < 0 || row >= h) return std::nullopt;
    col = (col + w) % w;  // azimuth wraps around
    const std::int32_t idx = image.point_index(row, col);
    if (idx < 0) return std::nullopt;
    return position(cloud.points[std::size_t(idx)]);
  };
  // Central difference when both neighbours exist, one-sided otherwise.
  auto tangent = [](const std::optional<Vec3>& before, const Vec3& centre,
                    const std::optional<Vec3>& after) -> std::optional<Vec3> {
    if (before && after) return *after - *before;
    if (after) return *after - centre;
    if (before) return centre - *before;
    return std::nullopt;
  };

  for (int row = 0; row < h; ++row) {
    for (int col = 0; col < w; ++col) {
      const std::int32_t idx = image.point_index(row, col);
      if (idx < 0) continue;
      const Vec3 centre = position(cloud.points[std::size_t(idx)]);
      const auto horizontal = tangent(position_at(row, col - 1), centre, position_at(row, col + 1));
      const auto vertical = tangent(position_at(row - 1, col), centre, position_at(row + 1, col));

      double cos_theta = 1.0;
      if (horizontal && vertical) {
        const Vec3 normal = horizontal->cross(*vertical);
        const double n = normal.norm();
        const double r = centre.norm();
        if (n > 0.0 && r > 0.0) cos_theta = std::abs(normal.dot(centre)) / (n * r);
      }
      image.at(Channel::Incidence, row, col) =
          float(std::clamp(cos_theta, double(kMinCosIncidence), 1.0));
    }
  }
  return image;
}

std::vector<std::byte> dump_bytes(const RangeImage& image) {
  const auto& onehot = image.weather_onehot();
  const std::uint32_t planes = std::uint32_t(kChannelCount + onehot.size());
  std::vector<std::byte> out;
  out.reserve(12 + std::size_t(planes) * image.pixel_count() * 4);
  append_u32(out, std::uint32_t(image.height()));
  append_u32(out, std::uint32_t(image.width()));
  append_u32(out, planes);
  for (float v : image.data()) append_u32(out, std::bit_cast<std::uint32_t>(v));
  for (float v : onehot) {
    for (std::size_t k = 0; k < image.pixel_count(); ++k) {
      append_u32(out, std::bit_cast<std::uint32_t>(v));
    }
  }
  return out;
}

void write_dump(const RangeImage& image, const std::filesystem::path& path) {
  io::write_file(path, dump_bytes(image));
}

DumpedImage read_dump(const std::filesystem::path& path) {
  const auto bytes = io::read_file(path);
  if (bytes.size() < 12) throw Error(ErrorKind::TruncatedFile, "dump header truncated");
  DumpedImage d;
  d.height = read_u32(bytes.data());
  d.width = read_u32(bytes.data() + 4);
  d.planes = read_u32(bytes.data() + 8);
  const std::size_t count = std::size_t(d.height) * d.width * d.planes;
  if (bytes.size() != 12 + 4 * count) throw Error(ErrorKind::TruncatedFile, "dump body size");
  d.values.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    d.values[i] = std::bit_cast<float>(read_u32(bytes.data() + 12 + 4 * i));
  }
  return d;
}

}  // namespace realitygen::projection

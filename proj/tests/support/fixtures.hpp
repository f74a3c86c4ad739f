#pragma once

// Synthetic sweeps and dataset trees shared by the unit and acceptance suites.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "realitygen/io.hpp"
#include "realitygen/pointcloud.hpp"
#include "realitygen/projection.hpp"

namespace realitygen::fixture {

inline constexpr double kDeg = std::numbers::pi / 180.0;

/// Beam direction through the centre of pixel (row, col).
inline void beam_direction(const projection::SensorProfile& p, double row, double col, double& ux,
                           double& uy, double& uz) {
  const double span = p.fov_up_deg - p.fov_down_deg;
  const double elevation = (p.fov_up_deg - (row + 0.5) * span / p.channels) * kDeg;
  const double azimuth = std::numbers::pi * (1.0 - 2.0 * (col + 0.5) / p.width);
  ux = std::cos(elevation) * std::cos(azimuth);
  uy = std::cos(elevation) * std::sin(azimuth);
  uz = std::sin(elevation);
}

/// Ray-cast street scene seen by a spinning sensor at the origin: a ground
/// plane 1.73 m below the sensor, building facades on both sides, and a few
/// box-shaped cars. Points carry SemanticKITTI-style labels (road 40,
/// building 50, car 10, vegetation 70) and material-dependent intensities.
/// `column_step` subsamples azimuth to keep fixtures small.
inline PointCloud street_sweep(std::uint64_t seed,
                               const projection::SensorProfile& profile =
                                   projection::SensorProfile::hdl64(),
                               int column_step = 1, double dropout = 0.05) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> noise(0.0, 0.01);

  struct Box {
    double x0, x1, y0, y1, z0, z1;
  };
  std::vector<Box> cars;
  for (int i = 0; i < 6; ++i) {
    const double x = -30.0 + 60.0 * unit(rng);
    const double y = (i % 2 ? 3.0 : -3.0) + unit(rng);
    cars.push_back({x, x + 4.2, y - 0.9, y + 0.9, -1.73, -0.3});
  }
  const double left = 9.0 + 4.0 * unit(rng);
  const double right = -(9.0 + 4.0 * unit(rng));

  PointCloud cloud;
  cloud.format = FormatTag::Kitti4;
  for (int row = 0; row < profile.channels; ++row) {
    for (int col = 0; col < profile.width; col += column_step) {
      if (unit(rng) < dropout) continue;
      double ux, uy, uz;
      beam_direction(profile, row + 0.8 * (unit(rng) - 0.5), col + 0.8 * (unit(rng) - 0.5), ux,
                     uy, uz);
      double best = 1e9;
      std::uint32_t label = 0;
      if (uz < 0) {
        const double t = -1.73 / uz;
        if (t < best) best = t, label = 40;
      }
      if (uy > 0) {
        const double t = left / uy;
        if (t < best && uz * t < 8.0) best = t, label = (std::abs(ux * t) > 40 ? 70 : 50);
      } else if (uy < 0) {
        const double t = right / uy;
        if (t < best && uz * t < 8.0) best = t, label = (std::abs(ux * t) > 40 ? 70 : 50);
      }
      for (const Box& b : cars) {
        // Slab intersection.
        double t0 = 0.0, t1 = 1e9;
        const double o[3] = {0, 0, 0}, d[3] = {ux, uy, uz};
        const double lo[3] = {b.x0, b.y0, b.z0}, hi[3] = {b.x1, b.y1, b.z1};
        bool hit = true;
        for (int a = 0; a < 3 && hit; ++a) {
          if (std::abs(d[a]) < 1e-12) {
            hit = o[a] >= lo[a] && o[a] <= hi[a];
            continue;
          }
          double ta = (lo[a] - o[a]) / d[a], tb = (hi[a] - o[a]) / d[a];
          if (ta > tb) std::swap(ta, tb);
          t0 = std::max(t0, ta);
          t1 = std::min(t1, tb);
          hit = t0 <= t1;
        }
        if (hit && t0 > 0 && t0 < best) best = t0, label = 10;
      }
      if (best > 110.0 || label == 0) continue;
      const double r = best + noise(rng);
      double base = label == 40 ? 0.15 : label == 50 ? 0.35 : label == 70 ? 0.25 : 0.45;
      const double intensity = std::clamp(base * (0.4 + 1.2 * unit(rng)) * std::min(1.0, 12.0 / r) +
                                              0.03 * unit(rng),
                                          0.0, 0.99);
      Point p;
      p.x = float(ux * r);
      p.y = float(uy * r);
      p.z = float(uz * r);
      p.intensity = float(std::round(intensity * 100.0) / 100.0);
      p.label = label | (std::uint32_t(unit(rng) * 8) << 16);  // instance id in the upper bits
      cloud.points.push_back(p);
    }
  }
  return cloud;
}

/// The same sweep without labels (what a bare .bin file decodes to).
inline PointCloud without_labels(PointCloud cloud) {
  for (auto& p : cloud.points) p.label.reset();
  return cloud;
}

/// Uniformly random points inside a shell around the sensor.
inline PointCloud random_cloud(std::uint64_t seed, std::size_t n, FormatTag format = FormatTag::Kitti4,
                               double max_range = 80.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  PointCloud cloud;
  cloud.format = format;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = 1.0 + (max_range - 1.0) * unit(rng);
    const double az = 2 * std::numbers::pi * unit(rng);
    const double el = (-26.0 + 30.0 * unit(rng)) * kDeg;
    Point p;
    p.x = float(r * std::cos(el) * std::cos(az));
    p.y = float(r * std::cos(el) * std::sin(az));
    p.z = float(r * std::sin(el));
    p.intensity = float(unit(rng));
    if (format == FormatTag::Nuscenes5) {
      p.intensity = float(std::floor(255.0 * unit(rng)));
      p.ring = std::uint16_t(rng() % 32);
    }
    cloud.points.push_back(p);
  }
  return cloud;
}

/// Analytic plane n . p = d with n = (cos a, sin a, 0), sampled at pixel
/// centres in a window around the forward beam. Returns the cloud plus the
/// exact cos(theta) for each point.
struct PlaneFixture {
  PointCloud cloud;
  std::vector<double> cos_theta;
  std::vector<projection::Pixel> pixels;
};

inline PlaneFixture plane_fixture(double angle_deg, double distance,
                                  const projection::SensorProfile& profile, int half_rows,
                                  int half_cols) {
  PlaneFixture f;
  f.cloud.format = FormatTag::Kitti4;
  const double nx = std::cos(angle_deg * kDeg), ny = std::sin(angle_deg * kDeg);
  const int row_mid = profile.channels / 2;
  const int col_mid = profile.width / 2;
  for (int row = row_mid - half_rows; row <= row_mid + half_rows; ++row) {
    for (int col = col_mid - half_cols; col <= col_mid + half_cols; ++col) {
      double ux, uy, uz;
      beam_direction(profile, row, col, ux, uy, uz);
      const double dot = nx * ux + ny * uy;
      const double t = distance / dot;
      Point p;
      p.x = float(ux * t);
      p.y = float(uy * t);
      p.z = float(uz * t);
      p.intensity = 0.5f;
      f.cloud.points.push_back(p);
      f.cos_theta.push_back(std::abs(dot));
      f.pixels.push_back({row, col});
    }
  }
  return f;
}

/// SemanticKITTI-style tree: sequences/NN/velodyne/XXXXXX.bin plus labels.
inline std::vector<std::string> write_kitti_tree(const std::filesystem::path& root,
                                                 const std::vector<std::string>& sequences,
                                                 int frames_per_sequence, std::uint64_t seed,
                                                 int column_step = 8) {
  std::vector<std::string> rel;
  int k = 0;
  for (const auto& seq : sequences) {
    for (int f = 0; f < frames_per_sequence; ++f, ++k) {
      char name[16];
      std::snprintf(name, sizeof name, "%06d", f);
      const auto cloud = street_sweep(seed + std::uint64_t(k), projection::SensorProfile::hdl64(),
                                      column_step);
      const std::string bin = "sequences/" + seq + "/velodyne/" + name + ".bin";
      io::write_sweep(cloud, root / bin);
      std::vector<std::uint32_t> labels;
      for (const auto& p : cloud.points) labels.push_back(*p.label);
      io::write_labels(labels, root / ("sequences/" + seq + "/labels/" + name + ".label"));
      rel.push_back(bin);
    }
  }
  return rel;
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() /
             ("realitygen_" + name + "_" + std::to_string(std::random_device{}()));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace realitygen::fixture

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstring>

#include "realitygen/error.hpp"
#include "realitygen/material.hpp"
#include "realitygen/pipeline.hpp"
#include "realitygen/projection.hpp"
#include "realitygen/version.hpp"
#include "realitygen/weather.hpp"

namespace py = pybind11;
using namespace realitygen;

namespace {

using FloatArray = py::array_t<float, py::array::c_style | py::array::forcecast>;
using LabelArray = py::array_t<std::uint32_t, py::array::c_style | py::array::forcecast>;

PointCloud to_cloud(const FloatArray& points, const std::optional<LabelArray>& labels) {
  if (points.ndim() != 2 || (points.shape(1) != 4 && points.shape(1) != 5)) {
    throw py::value_error("points must have shape (N, 4) or (N, 5)");
  }
  const auto n = std::size_t(points.shape(0));
  const auto k = std::size_t(points.shape(1));
  // Round-trip through the binary parser so validation matches file input.
  std::vector<std::byte> bytes(n * k * sizeof(float));
  std::memcpy(bytes.data(), points.data(), bytes.size());
  PointCloud cloud = io::parse_sweep(bytes, k == 4 ? FormatTag::Kitti4 : FormatTag::Nuscenes5);
  if (labels) {
    std::span<const std::uint32_t> span(labels->data(), std::size_t(labels->size()));
    cloud = io::attach_labels(std::move(cloud), span);
  }
  return cloud;
}

FloatArray to_array(const PointCloud& cloud) {
  const std::size_t k = cloud.format == FormatTag::Kitti4 ? 4 : 5;
  FloatArray out({cloud.size(), k});
  const auto bytes = io::serialize_sweep(cloud);
  std::memcpy(out.mutable_data(), bytes.data(), bytes.size());
  return out;
}

py::tuple augment_array(const FloatArray& points, const std::string& weather_name, double rate,
                        std::uint64_t seed, const std::string& profile,
                        std::optional<LabelArray> labels, std::optional<double> noise_floor,
                        std::optional<double> alpha, std::optional<double> divergence,
                        unsigned workers) {
  const PointCloud cloud = to_cloud(points, labels);
  weather::WeatherParams params;
  params.weather = weather::parse_precipitation(weather_name);
  params.rate_mm_h = rate;
  params.seed = seed;
  if (noise_floor) params.noise_floor = *noise_floor;
  if (alpha) params.alpha_override = *alpha;
  if (divergence) params.beam_divergence_rad = *divergence;
  const auto sensor = projection::SensorProfile::by_name(profile);
  const auto table = physics::MaterialTable::semantic_kitti_defaults();

  weather::DistortResult result;
  {
    py::gil_scoped_release release;
    result = pipeline::augment_frame(cloud, sensor, &table, params, workers);
  }
  py::dict summary;
  summary["kept"] = result.outcome.summary.kept;
  summary["relocated"] = result.outcome.summary.relocated;
  summary["dropped"] = result.outcome.summary.dropped;
  summary["alpha_used"] = result.outcome.alpha_used;
  return py::make_tuple(to_array(result.cloud), summary);
}

py::tuple project_array(const FloatArray& points, const std::string& profile,
                        std::optional<LabelArray> labels, bool incidence) {
  const PointCloud cloud = to_cloud(points, labels);
  const auto sensor = projection::SensorProfile::by_name(profile);
  const auto table = physics::MaterialTable::semantic_kitti_defaults();
  projection::RangeImage image;
  {
    py::gil_scoped_release release;
    image = projection::project(cloud, sensor, &table);
    if (incidence) image = projection::compute_incidence(cloud, std::move(image));
  }
  const auto h = std::size_t(image.height()), w = std::size_t(image.width());
  py::array_t<float> channels({std::size_t(5), h, w});
  std::memcpy(channels.mutable_data(), image.data().data(), 5 * h * w * sizeof(float));
  py::array_t<std::int32_t> index({h, w});
  std::memcpy(index.mutable_data(), image.pixel_to_point().data(), h * w * sizeof(std::int32_t));
  return py::make_tuple(channels, index);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "LiDAR weather augmentation and range-image projection.";

  py::register_exception<Error>(m, "Error", PyExc_ValueError);

  m.def("version", [] { return std::string(kVersion); });

  m.def("augment_array", &augment_array, py::arg("points"), py::arg("weather") = "rain",
        py::arg("rate") = 10.0, py::arg("seed") = 0, py::arg("profile") = "hdl64",
        py::arg("labels") = py::none(), py::arg("noise_floor") = py::none(),
        py::arg("alpha") = py::none(), py::arg("divergence") = py::none(),
        py::arg("workers") = 1,
        "Apply rain or snow to an (N, 4) or (N, 5) float32 sweep.\n\n"
        "Returns (points, summary) where summary holds kept/relocated/dropped counts.");

  m.def("project_array", &project_array, py::arg("points"), py::arg("profile") = "hdl64",
        py::arg("labels") = py::none(), py::arg("incidence") = true,
        "Project a sweep to a range image.\n\n"
        "Returns (channels, index): channels is (5, H, W) float32 in the order range, incidence,\n"
        "reflectance, intensity, mask; index is (H, W) int32 with -1 for empty pixels.");
}

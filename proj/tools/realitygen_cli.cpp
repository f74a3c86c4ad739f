// realitygen: batch and single-frame LiDAR weather/sensor transforms.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>

#include "realitygen/error.hpp"
#include "realitygen/io.hpp"
#include "realitygen/metrics.hpp"
#include "realitygen/physics.hpp"
#include "realitygen/pipeline.hpp"
#include "realitygen/projection.hpp"
#include "realitygen/version.hpp"
#include "realitygen/weather.hpp"

namespace fs = std::filesystem;
using namespace realitygen;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitPartial = 1;
constexpr int kExitFatal = 2;

FormatTag parse_format(const std::string& name) {
  if (name == "kitti4" || name == "kitti") return FormatTag::Kitti4;
  if (name == "nuscenes5" || name == "nuscenes") return FormatTag::Nuscenes5;
  throw Error(ErrorKind::InvalidArgument, "unknown format '" + name + "'");
}

struct FrameInputs {
  std::string format = "kitti4";
  std::string profile = "hdl64";
  std::string labels;
  std::string materials;
  bool drop_invalid = false;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--format", format, "kitti4 or nuscenes5")->capture_default_str();
    cmd->add_option("--profile", profile, "hdl64 or nuscenes32")->capture_default_str();
    cmd->add_option("--labels", labels, "SemanticKITTI .label file for the frame");
    cmd->add_option("--materials", materials, "material reflectance table");
    cmd->add_flag("--drop-invalid", drop_invalid, "drop non-finite and zero-range points");
  }

  PointCloud load(const std::string& path) const {
    io::ReadOptions options;
    options.drop_invalid = drop_invalid;
    PointCloud cloud = io::read_sweep(path, parse_format(format), options);
    if (!labels.empty()) cloud = io::attach_labels(std::move(cloud), io::read_labels(labels));
    return cloud;
  }

  physics::MaterialTable table() const {
    return materials.empty() ? physics::MaterialTable::semantic_kitti_defaults()
                             : physics::MaterialTable::load(materials);
  }
};

int cmd_run(const std::string& config_path) {
  const auto cfg = pipeline::JobConfig::load(config_path);
  const auto manifest = pipeline::run_job(cfg);
  const std::size_t failed = manifest.failed();
  std::cout << "frames=" << manifest.frame_count << '\n'
            << "records=" << manifest.records.size() << '\n'
            << "failed=" << failed << '\n'
            << "config_digest=" << manifest.config_digest << '\n'
            << "manifest=" << (cfg.output_root / pipeline::kManifestName).string() << '\n';
  for (const auto& r : manifest.records) {
    if (!r.ok()) std::cerr << "error " << r.variant << '/' << r.relative_path << ": " << r.error << '\n';
  }
  return failed == 0 ? kExitOk : kExitPartial;
}

int cmd_validate(const std::string& source, const std::string& derived, const std::string& dataset,
                 const std::string& keyframe_dir) {
  io::EnumerateOptions options;
  options.nuscenes_keyframe_dir = keyframe_dir;
  const auto layout = io::enumerate_frames(source, io::parse_dataset_kind(dataset), options);
  const auto report = pipeline::validate_correspondence(layout, derived);
  std::cout << report.to_text();
  std::cout << "checked=" << report.checked << '\n'
            << "missing=" << report.missing.size() << '\n'
            << "extra=" << report.extra.size() << '\n'
            << "format_violations=" << report.format_violations.size() << '\n'
            << "point_count_violations=" << report.point_count_violations.size() << '\n'
            << "manifest_mismatches=" << report.manifest_mismatches.size() << '\n'
            << "points_removed=" << report.point_delta << '\n'
            << "valid=" << (report.clean() ? "true" : "false") << '\n';
  return report.clean() ? kExitOk : kExitPartial;
}

std::set<std::string> list_frames(const fs::path& root) {
  std::set<std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file() && e.path().extension() == ".bin") {
      out.insert(fs::relative(e.path(), root).generic_string());
    }
  }
  return out;
}

int cmd_stats(const std::string& a_root, const std::string& b_root, const FrameInputs& in,
              int bins, const std::string& csv_path) {
  const auto profile = projection::SensorProfile::by_name(in.profile);
  const auto table = in.table();
  const auto a_frames = list_frames(a_root);
  const auto b_frames = list_frames(b_root);

  std::optional<std::ofstream> csv;
  if (!csv_path.empty()) {
    csv.emplace(csv_path);
    if (!*csv) throw Error(ErrorKind::IoFailure, "cannot write " + csv_path);
    *csv << "frame,points_a,points_b,hist_w1,intensity_l1,physics_l1_a,physics_l1_b\n";
  }

  double sum_w1 = 0.0, sum_l1 = 0.0, sum_phy_a = 0.0, sum_phy_b = 0.0;
  std::size_t n = 0, failed = 0;
  for (const auto& frame : a_frames) {
    if (!b_frames.count(frame)) continue;
    try {
      const auto a = in.load((fs::path(a_root) / frame).string());
      const auto b = in.load((fs::path(b_root) / frame).string());
      const auto ia = projection::compute_incidence(a, projection::project(a, profile, &table));
      const auto ib = projection::compute_incidence(b, projection::project(b, profile, &table));
      const auto clear = physics::AttenuationParams::clear();
      const double w1 = metrics::intensity_histogram_distance(ia, ib, bins);
      const double l1 = metrics::physics_loss(ia, ib);
      const double phy_a = metrics::physics_loss(ia, physics::reference_image(ia, clear));
      const double phy_b = metrics::physics_loss(ib, physics::reference_image(ib, clear));
      std::cout << "frame=" << frame << " points_a=" << a.size() << " points_b=" << b.size()
                << " hist_w1=" << w1 << " intensity_l1=" << l1 << " physics_l1_a=" << phy_a
                << " physics_l1_b=" << phy_b << '\n';
      if (csv) {
        *csv << frame << ',' << a.size() << ',' << b.size() << ',' << w1 << ',' << l1 << ','
             << phy_a << ',' << phy_b << '\n';
      }
      sum_w1 += w1;
      sum_l1 += l1;
      sum_phy_a += phy_a;
      sum_phy_b += phy_b;
      ++n;
    } catch (const Error& e) {
      std::cerr << "error " << frame << ": " << e.what() << '\n';
      ++failed;
    }
  }
  std::cout << "frames=" << n << '\n' << "failed=" << failed << '\n';
  if (n > 0) {
    std::cout << "mean_hist_w1=" << sum_w1 / n << '\n'
              << "mean_intensity_l1=" << sum_l1 / n << '\n'
              << "mean_physics_l1_a=" << sum_phy_a / n << '\n'
              << "mean_physics_l1_b=" << sum_phy_b / n << '\n';
  }
  return failed == 0 ? kExitOk : kExitPartial;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"realitygen: physics-based LiDAR sensor and weather transforms"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  std::string config_path;
  auto* run = app.add_subcommand("run", "run a dataset transformation job");
  run->add_option("--config", config_path, "job configuration file")->required();

  std::string source, derived, dataset = "semantickitti", keyframe_dir = "samples/LIDAR_TOP";
  auto* validate = app.add_subcommand("validate", "check a derived tree against its source");
  validate->add_option("--source", source)->required();
  validate->add_option("--derived", derived, "one variant directory of a job output")->required();
  validate->add_option("--dataset", dataset)->capture_default_str();
  validate->add_option("--keyframe-dir", keyframe_dir)->capture_default_str();

  std::string a_root, b_root, csv_path;
  int bins = 64;
  FrameInputs stats_in;
  auto* stats = app.add_subcommand("stats", "intensity realism metrics between two trees");
  stats->add_option("--a", a_root)->required();
  stats->add_option("--b", b_root)->required();
  stats->add_option("--bins", bins)->capture_default_str()->check(CLI::Range(2, 1 << 20));
  stats->add_option("--csv", csv_path, "also write per-frame rows as CSV");
  stats_in.add_to(stats);

  std::string in_path, out_path, weather_name = "snow", weather_config;
  double rate = 10.0;
  std::uint64_t seed = 0;
  unsigned workers = 1;
  std::optional<double> noise_floor, alpha, divergence;
  FrameInputs aug_in;
  auto* augment = app.add_subcommand("augment", "apply rain or snow to a single frame");
  augment->add_option("--in", in_path)->required();
  augment->add_option("--out", out_path)->required();
  augment->add_option("--weather", weather_name, "rain or snow")->capture_default_str();
  augment->add_option("--rate", rate, "precipitation rate, mm/h")->capture_default_str();
  augment->add_option("--seed", seed)->capture_default_str();
  augment->add_option("--workers", workers)->capture_default_str();
  augment->add_option("--noise-floor", noise_floor);
  augment->add_option("--alpha", alpha, "extinction coefficient override, 1/m");
  augment->add_option("--divergence", divergence, "beam divergence, rad");
  augment->add_option("--weather-config", weather_config, "weather key-value block");
  aug_in.add_to(augment);

  std::string dump_in, dump_out;
  bool with_incidence = true;
  FrameInputs dump_frame;
  auto* project = app.add_subcommand("project", "dump a frame's range image as binary");
  project->add_option("--in", dump_in)->required();
  project->add_option("--out", dump_out)->required();
  project->add_option("--incidence", with_incidence, "fill the incidence channel")
      ->capture_default_str();
  dump_frame.add_to(project);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(config_path);
    if (*validate) return cmd_validate(source, derived, dataset, keyframe_dir);
    if (*stats) return cmd_stats(a_root, b_root, stats_in, bins, csv_path);
    if (*augment) {
      weather::WeatherParams params;
      if (!weather_config.empty()) {
        const auto doc = config::parse_file(weather_config);
        const auto* kv = doc.section("");
        params = weather::WeatherParams::from_config(kv ? *kv : config::KeyValues{});
      }
      params.weather = weather::parse_precipitation(weather_name);
      params.rate_mm_h = rate;
      params.seed = seed;
      if (noise_floor) params.noise_floor = *noise_floor;
      if (alpha) params.alpha_override = *alpha;
      if (divergence) params.beam_divergence_rad = *divergence;

      const auto cloud = aug_in.load(in_path);
      const auto table = aug_in.table();
      const auto result = pipeline::augment_frame(
          cloud, projection::SensorProfile::by_name(aug_in.profile), &table, params, workers);
      io::write_sweep(result.cloud, out_path);
      const auto& s = result.outcome.summary;
      std::cout << "input_points=" << cloud.size() << '\n'
                << "output_points=" << result.cloud.size() << '\n'
                << "kept=" << s.kept << '\n'
                << "relocated=" << s.relocated << '\n'
                << "dropped=" << s.dropped << '\n'
                << "alpha_used=" << result.outcome.alpha_used << '\n';
      return kExitOk;
    }
    if (*project) {
      const auto cloud = dump_frame.load(dump_in);
      const auto table = dump_frame.table();
      auto image = projection::project(cloud, projection::SensorProfile::by_name(dump_frame.profile),
                                       &table);
      if (with_incidence) image = projection::compute_incidence(cloud, std::move(image));
      projection::write_dump(image, dump_out);
      std::cout << "occupied=" << image.occupied_count() << '\n'
                << "unprojected=" << image.unprojected_count() << '\n';
      return kExitOk;
    }
  } catch (const Error& e) {
    std::cerr << "realitygen: " << e.what() << '\n';
    return kExitFatal;
  } catch (const std::exception& e) {
    std::cerr << "realitygen: " << e.what() << '\n';
    return kExitFatal;
  }
  return kExitFatal;
}

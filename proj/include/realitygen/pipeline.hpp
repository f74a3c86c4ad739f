#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "realitygen/io.hpp"
#include "realitygen/material.hpp"
#include "realitygen/projection.hpp"
#include "realitygen/weather.hpp"

namespace realitygen::pipeline {

enum class Variant { Snow, Rain, IntensityAdapted };

std::string to_string(Variant v);
Variant parse_variant(const std::string& name);

// ---------------------------------------------------------------------------
// Single-frame transforms, shared by the batch job, the CLI and the bindings.

/// project -> compute_incidence -> distort. The returned cloud is the
/// adverse-weather sweep in source point order.
weather::DistortResult augment_frame(const PointCloud& cloud,
                                     const projection::SensorProfile& profile,
                                     const physics::MaterialTable* materials,
                                     const weather::WeatherParams& params, unsigned workers = 1);

/// project -> compute_incidence -> physics reference intensity -> unproject.
/// Points that lose a pixel collision keep their stored intensity.
PointCloud adapt_intensity(const PointCloud& cloud, const projection::SensorProfile& profile,
                           const physics::MaterialTable& materials);

/// Same as adapt_intensity but takes intensities from an externally generated
/// image (for example a learned generator's output) instead of the reference.
/// Throws Error{ShapeMismatch} when the image size does not match the profile.
PointCloud splice_intensity(const PointCloud& cloud, const projection::SensorProfile& profile,
                            const projection::DumpedImage& external);

// ---------------------------------------------------------------------------
// Batch job.

struct JobConfig {
  io::DatasetKind dataset = io::DatasetKind::SemanticKitti;
  std::filesystem::path source_root;
  std::filesystem::path output_root;
  std::vector<Variant> variants;
  std::map<Variant, weather::WeatherParams> weather;
  projection::SensorProfile profile;
  physics::MaterialTable materials = physics::MaterialTable::semantic_kitti_defaults();
  unsigned workers = 1;
  std::uint64_t seed = 0;
  bool drop_invalid = false;
  bool use_labels = true;
  io::EnumerateOptions enumerate;
  // Optional directory of externally generated intensity images
  // (<relative path>.rimg debug dumps) spliced into INTENSITY_ADAPTED frames.
  std::optional<std::filesystem::path> intensity_images;

  /// Parses the job file; relative paths resolve against its directory.
  /// Throws Error{InvalidConfig, IoFailure}.
  static JobConfig load(const std::filesystem::path& path);
  static JobConfig parse(const std::string& text, const std::filesystem::path& base_dir);

  void validate() const;

  /// Every setting that influences output bytes, one `key=value` per line.
  /// Worker count and output root are excluded.
  std::string canonical_text() const;
  std::string digest() const;
};

/// Per-frame seed: SplitMix of the global seed and a stable hash of the
/// frame's relative path, so adding or removing frames leaves others intact.
std::uint64_t frame_seed(std::uint64_t global_seed, const std::string& relative_path);

struct FrameRecord {
  std::string variant;
  std::string relative_path;
  std::string status = "ok";  // "ok" or "error"
  std::string error;
  std::string method;
  std::size_t input_points = 0;
  std::size_t output_points = 0;
  weather::WeatherSummary summary;
  double alpha_used = 0.0;
  std::uint64_t seed = 0;
  std::string sha256;

  bool ok() const { return status == "ok"; }
  bool operator==(const FrameRecord&) const = default;
};

struct Manifest {
  std::string tool_version;
  std::string config_digest;
  std::string dataset;
  std::vector<std::string> variants;
  std::size_t frame_count = 0;
  std::vector<FrameRecord> records;

  std::size_t failed() const;
  const FrameRecord* find(const std::string& variant, const std::string& relative_path) const;

  /// JSON lines: a header record followed by one record per frame/variant.
  std::string to_jsonl() const;
  static Manifest from_jsonl(const std::string& text);
  static Manifest read(const std::filesystem::path& path);
  void write(const std::filesystem::path& path) const;

  bool operator==(const Manifest&) const = default;
};

inline constexpr const char* kManifestName = "manifest.jsonl";

/// Runs every variant over every enumerated frame, writing
/// output_root/<variant>/<relative path> and output_root/manifest.jsonl.
/// Frame failures are recorded and skipped; enumeration or config problems
/// throw.
Manifest run_job(const JobConfig& config);

struct Finding {
  std::string relative_path;
  std::string detail;
  bool operator==(const Finding&) const = default;
};

struct CorrespondenceReport {
  std::vector<std::string> missing;
  std::vector<std::string> extra;
  std::vector<Finding> format_violations;
  std::vector<Finding> point_count_violations;
  std::vector<Finding> manifest_mismatches;
  // Informational: total points removed relative to the source frames.
  long long point_delta = 0;
  std::size_t checked = 0;

  bool clean() const {
    return missing.empty() && extra.empty() && format_violations.empty() &&
           point_count_violations.empty() && manifest_mismatches.empty();
  }
  std::string to_text() const;
};

/// Checks that `derived_root` (one variant directory) pairs one-to-one with
/// the source layout. When a manifest sits in `derived_root` or its parent,
/// point counts and checksums are checked against it as well.
CorrespondenceReport validate_correspondence(const io::DatasetLayout& source,
                                             const std::filesystem::path& derived_root);

}  // namespace realitygen::pipeline

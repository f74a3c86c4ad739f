#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "realitygen/pointcloud.hpp"

namespace realitygen::io {

struct ReadOptions {
  // Drop non-finite and zero-range records instead of rejecting the sweep.
  bool drop_invalid = false;
};

/// Decodes a headerless binary sweep. Throws Error{TruncatedFile,
/// NonFiniteValue, ZeroRange, InvalidRing, EmptySweep}.
PointCloud parse_sweep(std::span<const std::byte> bytes, FormatTag format,
                       const ReadOptions& options = {});

/// Inverse of parse_sweep. The output is n_points * record_size(format) bytes.
std::vector<std::byte> serialize_sweep(const PointCloud& cloud);

PointCloud read_sweep(const std::filesystem::path& path, FormatTag format,
                      const ReadOptions& options = {});

/// Writes the sweep, creating parent directories as needed. Throws IoFailure.
void write_sweep(const PointCloud& cloud, const std::filesystem::path& path);

std::vector<std::byte> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::byte> bytes);

// SemanticKITTI .label files: one little-endian uint32 per point.
std::vector<std::uint32_t> read_labels(const std::filesystem::path& path);
void write_labels(std::span<const std::uint32_t> labels, const std::filesystem::path& path);

/// Attaches labels positionally. Throws LabelMismatch when counts differ.
PointCloud attach_labels(PointCloud cloud, std::span<const std::uint32_t> labels);

enum class DatasetKind { SemanticKitti, Nuscenes, Voxelscape };

DatasetKind parse_dataset_kind(const std::string& name);
std::string to_string(DatasetKind kind);
FormatTag format_for(DatasetKind kind);

struct EnumerateOptions {
  // nuScenes keyframe sweeps, relative to the dataset root.
  std::string nuscenes_keyframe_dir = "samples/LIDAR_TOP";
  // Raise MissingSequence when any of sequences 00-10 is absent.
  bool strict_sequences = false;
};

struct DatasetLayout {
  std::filesystem::path root;
  DatasetKind dataset = DatasetKind::SemanticKitti;
  // Relative paths with '/' separators, lexicographically sorted.
  std::vector<std::string> frame_ids;
  std::vector<std::string> sequence_ids;
  std::optional<std::filesystem::path> label_dir;
  std::vector<std::string> warnings;

  std::filesystem::path frame_path(const std::string& frame_id) const {
    return root / frame_id;
  }
  /// Label file for a frame, if the dataset has one on disk.
  std::optional<std::filesystem::path> label_path(const std::string& frame_id) const;
};

/// Lists the frames that make up a dataset. SemanticKITTI and Voxelscape are
/// restricted to sequences 00-10 (`sequences/NN/velodyne/*.bin`); nuScenes
/// takes every `.bin` under the keyframe directory.
DatasetLayout enumerate_frames(const std::filesystem::path& root, DatasetKind dataset,
                               const EnumerateOptions& options = {});

}  // namespace realitygen::io

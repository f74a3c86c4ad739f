#include "realitygen/io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <cstdio>

#include "realitygen/error.hpp"

namespace fs = std::filesystem;

namespace realitygen::io {
namespace {

std::uint32_t load_u32_le(const std::byte* p) {
  std::uint32_t v;
  std::memcpy(&v, p, sizeof v);
  if constexpr (std::endian::native == std::endian::big) {
    v = (v >> 24) | ((v >> 8) & 0xFF00u) | ((v << 8) & 0xFF0000u) | (v << 24);
  }
  return v;
}

void store_u32_le(std::byte* p, std::uint32_t v) {
  if constexpr (std::endian::native == std::endian::big) {
    v = (v >> 24) | ((v >> 8) & 0xFF00u) | ((v << 8) & 0xFF0000u) | (v << 24);
  }
  std::memcpy(p, &v, sizeof v);
}

float load_f32_le(const std::byte* p) { return std::bit_cast<float>(load_u32_le(p)); }
void store_f32_le(std::byte* p, float v) { store_u32_le(p, std::bit_cast<std::uint32_t>(v)); }

// Ring indices are stored as float32; only non-negative integral values
// survive a float -> uint16 -> float round trip bit for bit.
std::optional<std::uint16_t> decode_ring(float value) {
  if (!std::isfinite(value) || std::signbit(value) || value > 65535.f ||
      std::trunc(value) != value) {
    return std::nullopt;
  }
  return static_cast<std::uint16_t>(value);
}

}  // namespace

PointCloud parse_sweep(std::span<const std::byte> bytes, FormatTag format,
                       const ReadOptions& options) {
  const std::size_t rec = record_size(format);
  if (bytes.size() % rec != 0) {
    throw Error(ErrorKind::TruncatedFile, std::to_string(bytes.size()) +
                                              " bytes is not a multiple of the " +
                                              std::to_string(rec) + "-byte record");
  }
  if (bytes.empty()) throw Error(ErrorKind::EmptySweep, "sweep has no points");

  PointCloud cloud;
  cloud.format = format;
  const std::size_t n = bytes.size() / rec;
  cloud.points.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::byte* r = bytes.data() + i * rec;
    Point p;
    p.x = load_f32_le(r);
    p.y = load_f32_le(r + 4);
    p.z = load_f32_le(r + 8);
    p.intensity = load_f32_le(r + 12);

    const bool finite = std::isfinite(p.x) && std::isfinite(p.y) && std::isfinite(p.z) &&
                        std::isfinite(p.intensity);
    if (!finite) {
      if (options.drop_invalid) continue;
      throw Error(ErrorKind::NonFiniteValue, "record " + std::to_string(i));
    }
    if (p.range() <= 0.0) {
      if (options.drop_invalid) continue;
      throw Error(ErrorKind::ZeroRange, "record " + std::to_string(i));
    }
    if (format == FormatTag::Nuscenes5) {
      const float raw_ring = load_f32_le(r + 16);
      p.ring = decode_ring(raw_ring);
      if (!p.ring) {
        if (options.drop_invalid) continue;
        throw Error(ErrorKind::InvalidRing, "record " + std::to_string(i));
      }
    }
    cloud.points.push_back(p);
  }
  if (cloud.points.empty()) throw Error(ErrorKind::EmptySweep, "no valid points");
  return cloud;
}

std::vector<std::byte> serialize_sweep(const PointCloud& cloud) {
  const std::size_t rec = record_size(cloud.format);
  std::vector<std::byte> out(cloud.points.size() * rec);
  for (std::size_t i = 0; i < cloud.points.size(); ++i) {
    const Point& p = cloud.points[i];
    std::byte* r = out.data() + i * rec;
    store_f32_le(r, p.x);
    store_f32_le(r + 4, p.y);
    store_f32_le(r + 8, p.z);
    store_f32_le(r + 12, p.intensity);
    if (cloud.format == FormatTag::Nuscenes5) {
      store_f32_le(r + 16, static_cast<float>(p.ring.value_or(0)));
    }
  }
  return out;
}

std::vector<std::byte> read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoFailure, "cannot open " + path.string());
  std::vector<char> raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw Error(ErrorKind::IoFailure, "read failed: " + path.string());
  std::vector<std::byte> bytes(raw.size());
  std::memcpy(bytes.data(), raw.data(), raw.size());
  return bytes;
}

void write_file(const fs::path& path, std::span<const std::byte> bytes) {
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  if (ec) throw Error(ErrorKind::IoFailure, "cannot create " + path.parent_path().string());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::IoFailure, "cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorKind::IoFailure, "write failed: " + path.string());
}

PointCloud read_sweep(const fs::path& path, FormatTag format, const ReadOptions& options) {
  auto bytes = read_file(path);
  PointCloud cloud = parse_sweep(bytes, format, options);
  cloud.source_path = path.string();
  return cloud;
}

void write_sweep(const PointCloud& cloud, const fs::path& path) {
  write_file(path, serialize_sweep(cloud));
}

std::vector<std::uint32_t> read_labels(const fs::path& path) {
  auto bytes = read_file(path);
  if (bytes.size() % 4 != 0) {
    throw Error(ErrorKind::TruncatedFile, path.string() + " is not a whole number of labels");
  }
  std::vector<std::uint32_t> labels(bytes.size() / 4);
  for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = load_u32_le(bytes.data() + 4 * i);
  return labels;
}

void write_labels(std::span<const std::uint32_t> labels, const fs::path& path) {
  std::vector<std::byte> bytes(labels.size() * 4);
  for (std::size_t i = 0; i < labels.size(); ++i) store_u32_le(bytes.data() + 4 * i, labels[i]);
  write_file(path, bytes);
}

PointCloud attach_labels(PointCloud cloud, std::span<const std::uint32_t> labels) {
  if (labels.size() != cloud.points.size()) {
    throw Error(ErrorKind::LabelMismatch, std::to_string(labels.size()) + " labels for " +
                                              std::to_string(cloud.points.size()) + " points");
  }
  for (std::size_t i = 0; i < labels.size(); ++i) cloud.points[i].label = labels[i];
  return cloud;
}

DatasetKind parse_dataset_kind(const std::string& name) {
  std::string n = name;
  std::transform(n.begin(), n.end(), n.begin(), [](unsigned char c) { return std::tolower(c); });
  if (n == "semantickitti" || n == "kitti") return DatasetKind::SemanticKitti;
  if (n == "nuscenes") return DatasetKind::Nuscenes;
  if (n == "voxelscape") return DatasetKind::Voxelscape;
  throw Error(ErrorKind::InvalidConfig, "unknown dataset '" + name + "'");
}

std::string to_string(DatasetKind kind) {
  switch (kind) {
    case DatasetKind::SemanticKitti: return "semantickitti";
    case DatasetKind::Nuscenes: return "nuscenes";
    case DatasetKind::Voxelscape: return "voxelscape";
  }
  return "unknown";
}

FormatTag format_for(DatasetKind kind) {
  return kind == DatasetKind::Nuscenes ? FormatTag::Nuscenes5 : FormatTag::Kitti4;
}

std::optional<fs::path> DatasetLayout::label_path(const std::string& frame_id) const {
  if (dataset == DatasetKind::Nuscenes) return std::nullopt;
  // sequences/NN/velodyne/XXXXXX.bin -> sequences/NN/labels/XXXXXX.label
  fs::path rel(frame_id);
  fs::path label = root / rel.parent_path().parent_path() / "labels" / rel.stem();
  label += ".label";
  if (!fs::exists(label)) return std::nullopt;
  return label;
}

namespace {

std::vector<std::string> list_bins(const fs::path& dir, const fs::path& root) {
  std::vector<std::string> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".bin") {
      out.push_back(fs::relative(entry.path(), root).generic_string());
    }
  }
  return out;
}

}  // namespace

DatasetLayout enumerate_frames(const fs::path& root, DatasetKind dataset,
                               const EnumerateOptions& options) {
  if (!fs::is_directory(root)) {
    throw Error(ErrorKind::IoFailure, "dataset root " + root.string() + " is not a directory");
  }
  DatasetLayout layout;
  layout.root = root;
  layout.dataset = dataset;

  if (fs::is_empty(root)) throw Error(ErrorKind::EmptyDataset, root.string() + " is empty");

  if (dataset == DatasetKind::Nuscenes) {
    const fs::path dir = root / options.nuscenes_keyframe_dir;
    if (!fs::is_directory(dir)) {
      throw Error(ErrorKind::MissingSequence, "keyframe directory " + dir.string() + " not found");
    }
    layout.frame_ids = list_bins(dir, root);
    const fs::path lidarseg = root / "lidarseg";
    if (fs::is_directory(lidarseg)) layout.label_dir = lidarseg;
  } else {
    const fs::path seq_root = root / "sequences";
    if (!fs::is_directory(seq_root)) {
      throw Error(ErrorKind::MissingSequence, "no sequences/ directory under " + root.string());
    }
    for (int s = 0; s <= 10; ++s) {
      char id[3];
      std::snprintf(id, sizeof id, "%02d", s);
      const fs::path velodyne = seq_root / id / "velodyne";
      if (!fs::is_directory(velodyne)) {
        if (options.strict_sequences) {
          throw Error(ErrorKind::MissingSequence, "sequence " + std::string(id) + " absent");
        }
        layout.warnings.push_back("sequence " + std::string(id) + " absent");
        continue;
      }
      layout.sequence_ids.emplace_back(id);
      auto frames = list_bins(velodyne, root);
      layout.frame_ids.insert(layout.frame_ids.end(), frames.begin(), frames.end());
    }
    layout.label_dir = seq_root;
  }

  std::sort(layout.frame_ids.begin(), layout.frame_ids.end());
  if (layout.frame_ids.empty()) {
    throw Error(ErrorKind::EmptyDataset, "no frames found under " + root.string());
  }
  return layout;
}

}  // namespace realitygen::io

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>

namespace realitygen::physics {

/// Semantic class id -> material reflectance in (0, 1].
class MaterialTable {
 public:
  MaterialTable() = default;
  MaterialTable(std::map<std::uint32_t, double> reflectance, double default_reflectance);

  double lookup(std::uint32_t class_id) const;
  double default_reflectance() const { return default_; }
  const std::map<std::uint32_t, double>& entries() const { return table_; }

  /// Engineering defaults for the SemanticKITTI label set. Not measured values.
  static MaterialTable semantic_kitti_defaults();

  /// Plain key-value file: `<class id> = <reflectance>` lines plus an optional
  /// `default = <reflectance>`. Throws Error{InvalidConfig, IoFailure}.
  static MaterialTable load(const std::filesystem::path& path);

 private:
  std::map<std::uint32_t, double> table_;
  double default_ = 0.3;
};

}  // namespace realitygen::physics

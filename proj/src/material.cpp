#include "realitygen/material.hpp"

#include <charconv>
#include <cmath>
#include <string>

#include "realitygen/config.hpp"
#include "realitygen/error.hpp"

namespace realitygen::physics {
namespace {

void check_reflectance(double value, const std::string& where) {
  if (!(value > 0.0 && value <= 1.0)) {
    throw Error(ErrorKind::InvalidConfig,
                "reflectance for " + where + " must be in (0, 1], got " + std::to_string(value));
  }
}

}  // namespace

MaterialTable::MaterialTable(std::map<std::uint32_t, double> reflectance,
                             double default_reflectance)
    : table_(std::move(reflectance)), default_(default_reflectance) {
  check_reflectance(default_, "default");
  for (const auto& [id, r] : table_) check_reflectance(r, "class " + std::to_string(id));
}

double MaterialTable::lookup(std::uint32_t class_id) const {
  auto it = table_.find(class_id);
  return it == table_.end() ? default_ : it->second;
}

MaterialTable MaterialTable::semantic_kitti_defaults() {
  return MaterialTable(
      {
          {1, 0.30},   // outlier
          {10, 0.45},  // car
          {11, 0.40},  // bicycle
          {13, 0.45},  // bus
          {15, 0.40},  // motorcycle
          {16, 0.40},  // on-rails
          {18, 0.45},  // truck
          {20, 0.45},  // other-vehicle
          {30, 0.35},  // person
          {31, 0.35},  // bicyclist
          {32, 0.35},  // motorcyclist
          {40, 0.15},  // road
          {44, 0.15},  // parking
          {48, 0.20},  // sidewalk
          {49, 0.20},  // other-ground
          {50, 0.35},  // building
          {51, 0.30},  // fence
          {52, 0.30},  // other-structure
          {60, 0.60},  // lane-marking
          {70, 0.25},  // vegetation
          {71, 0.25},  // trunk
          {72, 0.20},  // terrain
          {80, 0.40},  // pole
          {81, 0.85},  // traffic-sign
          {99, 0.30},  // other-object
          {252, 0.45}, // moving-car
          {253, 0.35}, // moving-bicyclist
          {254, 0.35}, // moving-person
          {255, 0.35}, // moving-motorcyclist
          {256, 0.40}, // moving-on-rails
          {257, 0.45}, // moving-bus
          {258, 0.45}, // moving-truck
          {259, 0.45}, // moving-other-vehicle
      },
      0.3);
}

MaterialTable MaterialTable::load(const std::filesystem::path& path) {
  const config::Document doc = config::parse_file(path);
  for (const auto& [name, _] : doc.sections) {
    if (!name.empty()) {
      throw Error(ErrorKind::InvalidConfig, "material table has no sections, found [" + name + "]");
    }
  }
  std::map<std::uint32_t, double> table;
  double fallback = 0.3;
  if (const auto* kv = doc.section("")) {
    for (const auto& [key, _] : *kv) {
      const double value = config::get_double(*kv, key, 0.0);
      if (key == "default") {
        fallback = value;
        continue;
      }
      std::uint32_t id = 0;
      auto [ptr, ec] = std::from_chars(key.data(), key.data() + key.size(), id);
      if (ec != std::errc() || ptr != key.data() + key.size()) {
        throw Error(ErrorKind::InvalidConfig, "class id '" + key + "' is not an integer");
      }
      table[id] = value;
    }
  }
  return MaterialTable(std::move(table), fallback);
}

}  // namespace realitygen::physics

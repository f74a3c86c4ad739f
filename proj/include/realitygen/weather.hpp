#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "realitygen/config.hpp"
#include "realitygen/physics.hpp"
#include "realitygen/pointcloud.hpp"
#include "realitygen/projection.hpp"

namespace realitygen::weather {

enum class Precipitation { Rain, Snow };

Precipitation parse_precipitation(const std::string& name);
std::string to_string(Precipitation p);
physics::WeatherKind weather_kind(Precipitation p);
projection::WeatherStyle weather_style(Precipitation p);

/// Exponential drop/particle size distribution N(D) = n0 * exp(-slope * D),
/// D in mm, n0 in m^-3 mm^-1, slope in mm^-1.
struct SizeDistribution {
  double n0 = 0.0;
  double slope = 0.0;

  double density(double diameter_mm) const;
  /// Particles per cubic meter, integral of N(D) over D.
  double number_density() const { return n0 / slope; }
};

/// Marshall-Palmer (rain) or Gunn-Marshall (snow) size distribution at a
/// precipitation rate in mm/h. Throws Error{NonPositiveRate}.
SizeDistribution size_distribution(Precipitation weather, double rate_mm_h);

/// Closed-form extinction coefficient (1/m) with geometric-optics extinction
/// efficiency 2: alpha = 2 * (pi/4) * n0 * 2 / slope^3 * 1e-6.
double extinction_coefficient(Precipitation weather, double rate_mm_h);

struct WeatherParams {
  Precipitation weather = Precipitation::Rain;
  double rate_mm_h = 10.0;
  double noise_floor = 0.02;          // minimum detectable normalized intensity
  double beam_divergence_rad = 3e-3;
  std::uint64_t seed = 0;
  std::optional<double> alpha_override;            // 1/m
  std::optional<double> particle_density_override; // particles per m^3
  double beta_rain = 0.35;
  double beta_snow = 0.9;
  double r_min = 1.5;  // meters; no particle returns closer than this

  /// Throws Error{NonPositiveRate, InvalidArgument}.
  void validate() const;
  double beta() const { return weather == Precipitation::Snow ? beta_snow : beta_rain; }

  /// Reads the weather block keys: weather, rate_mm_h, noise_floor,
  /// beam_divergence_rad, seed, alpha_override, particle_density_override,
  /// beta_rain, beta_snow, r_min. Unset keys keep the values in `defaults`.
  static WeatherParams from_config(const config::KeyValues& kv, const WeatherParams& defaults);
  static WeatherParams from_config(const config::KeyValues& kv) {
    return from_config(kv, WeatherParams{});
  }
};

/// Alpha actually applied: the override when set, otherwise the closed form.
double extinction_coefficient(const WeatherParams& params);
/// Airborne particles per cubic meter used for beam intersections.
double particle_density(const WeatherParams& params);

/// Expected particle count inside the beam cone from the sensor out to
/// `range`: integral of (pi/4) (divergence * s)^2 * density ds.
double expected_particles(double range, double divergence_rad, double density);

enum class Verdict : std::uint8_t { Kept, Relocated, Dropped };

struct PointVerdict {
  Verdict verdict = Verdict::Kept;
  float intensity = 0.f;  // normalized intensity of the surviving return
  double range = 0.0;     // range of the surviving return, meters

  bool operator==(const PointVerdict&) const = default;
};

struct WeatherSummary {
  std::size_t kept = 0;
  std::size_t relocated = 0;
  std::size_t dropped = 0;

  std::size_t total() const { return kept + relocated + dropped; }
  bool operator==(const WeatherSummary&) const = default;
};

struct WeatherOutcome {
  std::vector<PointVerdict> verdicts;  // one per input point, input order
  WeatherSummary summary;
  double alpha_used = 0.0;

  bool operator==(const WeatherOutcome&) const = default;
};

struct DistortResult {
  PointCloud cloud;  // dropped points removed, relocated points moved
  WeatherOutcome outcome;
  projection::RangeImage image;  // weather-conditioned image
};

/// Applies the Monte-Carlo weather model to every point. Each point draws
/// from its own generator keyed by (seed, point index), so results do not
/// depend on `workers`. Throws Error{MissingChannels} when the image does
/// not belong to the cloud.
DistortResult distort(const PointCloud& cloud, const projection::RangeImage& image,
                      const WeatherParams& params, unsigned workers = 1);

}  // namespace realitygen::weather

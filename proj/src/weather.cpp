#include "realitygen/weather.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "realitygen/error.hpp"
#include "realitygen/parallel.hpp"
#include "realitygen/rng.hpp"

namespace realitygen::weather {

using projection::Channel;

Precipitation parse_precipitation(const std::string& name) {
  if (name == "rain" || name == "RAIN") return Precipitation::Rain;
  if (name == "snow" || name == "SNOW") return Precipitation::Snow;
  throw Error(ErrorKind::InvalidArgument, "weather must be rain or snow, got '" + name + "'");
}

std::string to_string(Precipitation p) { return p == Precipitation::Snow ? "snow" : "rain"; }

physics::WeatherKind weather_kind(Precipitation p) {
  return p == Precipitation::Snow ? physics::WeatherKind::Snow : physics::WeatherKind::Rain;
}

projection::WeatherStyle weather_style(Precipitation p) {
  return p == Precipitation::Snow ? projection::WeatherStyle::Snow
                                  : projection::WeatherStyle::Rain;
}

double SizeDistribution::density(double diameter_mm) const {
  return n0 * std::exp(-slope * diameter_mm);
}

SizeDistribution size_distribution(Precipitation weather, double rate_mm_h) {
  if (!(rate_mm_h > 0.0)) {
    throw Error(ErrorKind::NonPositiveRate, "rate " + std::to_string(rate_mm_h) + " mm/h");
  }
  if (weather == Precipitation::Rain) {
    return {8000.0, 4.1 * std::pow(rate_mm_h, -0.21)};
  }
  return {3800.0 * std::pow(rate_mm_h, -0.87), 2.55 * std::pow(rate_mm_h, -0.48)};
}

double extinction_coefficient(Precipitation weather, double rate_mm_h) {
  const SizeDistribution dsd = size_distribution(weather, rate_mm_h);
  // Q_ext * integral of (pi D^2 / 4) N(D) dD; D^2 in mm^2 -> m^2.
  constexpr double q_ext = 2.0;
  return q_ext * (std::numbers::pi / 4.0) * dsd.n0 * 2.0 / std::pow(dsd.slope, 3) * 1e-6;
}

void WeatherParams::validate() const {
  if (!(rate_mm_h > 0.0)) {
    throw Error(ErrorKind::NonPositiveRate, "rate " + std::to_string(rate_mm_h) + " mm/h");
  }
  if (!(noise_floor > 0.0 && noise_floor < 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "noise_floor must be in (0, 1)");
  }
  if (!(beam_divergence_rad > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "beam_divergence_rad must be > 0");
  }
  if (alpha_override && !(*alpha_override >= 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "alpha_override must be >= 0");
  }
  if (particle_density_override && !(*particle_density_override >= 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "particle_density_override must be >= 0");
  }
  if (!(beta_rain >= 0.0 && beta_rain <= 1.0) || !(beta_snow >= 0.0 && beta_snow <= 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "beta ratios must be in [0, 1]");
  }
  if (!(r_min >= 0.0)) throw Error(ErrorKind::InvalidArgument, "r_min must be >= 0");
}

WeatherParams WeatherParams::from_config(const config::KeyValues& kv,
                                         const WeatherParams& defaults) {
  WeatherParams p = defaults;
  if (kv.count("weather")) p.weather = parse_precipitation(config::get_string(kv, "weather", ""));
  p.rate_mm_h = config::get_double(kv, "rate_mm_h", p.rate_mm_h);
  p.noise_floor = config::get_double(kv, "noise_floor", p.noise_floor);
  p.beam_divergence_rad = config::get_double(kv, "beam_divergence_rad", p.beam_divergence_rad);
  p.seed = config::get_u64(kv, "seed", p.seed);
  if (auto a = config::get_optional_double(kv, "alpha_override")) p.alpha_override = a;
  if (auto d = config::get_optional_double(kv, "particle_density_override")) {
    p.particle_density_override = d;
  }
  p.beta_rain = config::get_double(kv, "beta_rain", p.beta_rain);
  p.beta_snow = config::get_double(kv, "beta_snow", p.beta_snow);
  p.r_min = config::get_double(kv, "r_min", p.r_min);
  p.validate();
  return p;
}

double extinction_coefficient(const WeatherParams& params) {
  if (params.alpha_override) return *params.alpha_override;
  return extinction_coefficient(params.weather, params.rate_mm_h);
}

double particle_density(const WeatherParams& params) {
  if (params.particle_density_override) return *params.particle_density_override;
  return size_distribution(params.weather, params.rate_mm_h).number_density();
}

double expected_particles(double range, double divergence_rad, double density) {
  // integral_0^R (pi/4) (div s)^2 n ds = (pi/12) div^2 n R^3
  return std::numbers::pi / 12.0 * divergence_rad * divergence_rad * density * range * range *
         range;
}

namespace {

struct PointModel {
  physics::AttenuationParams attenuation;
  double density;
  double slope;  // size distribution slope, 1/mm
  double beta;
  double noise_floor;
  double divergence;
  double r_min;
  std::uint64_t seed;
};

PointVerdict decide(const PointModel& m, double range, float intensity, std::uint64_t index) {
  SplitMix64 rng(stream_key(m.seed, index));

  const double hard = physics::attenuate(intensity, range, m.attenuation);

  double soft = 0.0;
  double particle_range = 0.0;
  const double lambda = expected_particles(range, m.divergence, m.density);
  if (lambda > 0.0 && range > m.r_min) {
    std::poisson_distribution<long> hits(lambda);
    if (hits(rng) > 0) {
      particle_range = m.r_min + (range - m.r_min) * rng.uniform();
      if (particle_range <= m.r_min) particle_range = std::nextafter(m.r_min, range);
      std::exponential_distribution<double> size(m.slope);
      const double diameter_m = size(rng) * 1e-3;
      const double footprint = m.divergence * particle_range;
      const double occupancy = std::min(1.0, (diameter_m * diameter_m) / (footprint * footprint));
      soft = m.beta * physics::attenuate(1.0, particle_range, m.attenuation) * occupancy;
    }
  }

  // A return the sensor already reported is detectable at its own level, so
  // the floor never exceeds the measured intensity.
  const double threshold = std::min(m.noise_floor, double(intensity));
  if (hard >= threshold && hard >= soft) return {Verdict::Kept, float(hard), range};
  if (soft >= m.noise_floor) return {Verdict::Relocated, float(soft), particle_range};
  return {Verdict::Dropped, 0.f, 0.0};
}

}  // namespace

DistortResult distort(const PointCloud& cloud, const projection::RangeImage& image,
                      const WeatherParams& params, unsigned workers) {
  params.validate();
  if (image.pixel_count() == 0) {
    throw Error(ErrorKind::MissingChannels, "range image is empty");
  }
  const auto owners = image.pixel_to_point();
  for (std::size_t k = 0; k < owners.size(); ++k) {
    if (owners[k] < 0) continue;
    if (std::size_t(owners[k]) >= cloud.size() || image.plane(Channel::Range)[k] <= 0.f) {
      throw Error(ErrorKind::MissingChannels, "range image does not match the cloud");
    }
  }

  const projection::SensorProfile& profile = image.profile();
  const double alpha = extinction_coefficient(params);
  const auto dsd = size_distribution(params.weather, params.rate_mm_h);
  const PointModel model{
      physics::AttenuationParams::make(weather_kind(params.weather), alpha),
      particle_density(params),
      dsd.slope,
      params.beta(),
      params.noise_floor,
      params.beam_divergence_rad,
      params.r_min,
      params.seed,
  };

  DistortResult result;
  WeatherOutcome& outcome = result.outcome;
  outcome.alpha_used = alpha;
  outcome.verdicts.resize(cloud.size());

  parallel_for(cloud.size(), workers, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const Point& p = cloud.points[i];
      outcome.verdicts[i] =
          decide(model, p.range(), projection::normalize_intensity(p.intensity, profile), i);
    }
  });

  result.cloud.format = cloud.format;
  result.cloud.source_path = cloud.source_path;
  result.cloud.points.reserve(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const PointVerdict& v = outcome.verdicts[i];
    const Point& src = cloud.points[i];
    switch (v.verdict) {
      case Verdict::Kept: {
        ++outcome.summary.kept;
        Point p = src;
        if (v.intensity != projection::normalize_intensity(src.intensity, profile)) {
          p.intensity = float(double(v.intensity) * profile.intensity_scale);
        }
        result.cloud.points.push_back(p);
        break;
      }
      case Verdict::Relocated: {
        ++outcome.summary.relocated;
        Point p = src;
        const double scale = v.range / src.range();
        p.x = float(src.x * scale);
        p.y = float(src.y * scale);
        p.z = float(src.z * scale);
        p.intensity = float(double(v.intensity) * profile.intensity_scale);
        result.cloud.points.push_back(p);
        break;
      }
      case Verdict::Dropped:
        ++outcome.summary.dropped;
        break;
    }
  }

  result.image = image;
  projection::RangeImage& out = result.image;
  for (int row = 0; row < out.height(); ++row) {
    for (int col = 0; col < out.width(); ++col) {
      const std::int32_t idx = out.point_index(row, col);
      if (idx < 0) continue;
      const PointVerdict& v = outcome.verdicts[std::size_t(idx)];
      switch (v.verdict) {
        case Verdict::Kept:
          out.at(Channel::Intensity, row, col) = v.intensity;
          break;
        case Verdict::Relocated:
          out.at(Channel::Range, row, col) = projection::normalize_range(v.range, profile);
          out.at(Channel::Intensity, row, col) = v.intensity;
          out.at(Channel::Incidence, row, col) = 1.f;
          out.at(Channel::Reflectance, row, col) = float(params.beta());
          break;
        case Verdict::Dropped:
          out.clear_pixel(row, col);
          break;
      }
    }
  }
  out.set_weather_style(weather_style(params.weather));
  return result;
}

}  // namespace realitygen::weather

#include "realitygen/physics.hpp"

#include <algorithm>
#include <cmath>

#include "realitygen/error.hpp"

namespace realitygen::physics {

using projection::Channel;
using projection::RangeImage;

AttenuationParams AttenuationParams::make(WeatherKind weather, double alpha) {
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) {
    throw Error(ErrorKind::InvalidArgument, "alpha must be finite and >= 0");
  }
  if (weather == WeatherKind::Clear && alpha != 0.0) {
    throw Error(ErrorKind::InvalidArgument, "clear weather requires alpha == 0");
  }
  return {alpha, weather};
}

double physics_intensity(double range, double cos_incidence, double reflectance) {
  if (!(range > 0.0)) throw Error(ErrorKind::NonPositiveRange, std::to_string(range));
  return std::clamp(reflectance * cos_incidence / range, 0.0, 1.0);
}

double attenuate(double intensity, double range, const AttenuationParams& params) {
  if (params.alpha == 0.0) return intensity;
  return intensity * std::exp(-2.0 * params.alpha * range);
}

RangeImage reference_image(const RangeImage& image, const AttenuationParams& params) {
  RangeImage out = image;
  const double max_range = image.profile().max_range;
  for (int row = 0; row < image.height(); ++row) {
    for (int col = 0; col < image.width(); ++col) {
      if (!image.occupied(row, col)) {
        out.at(Channel::Intensity, row, col) = 0.f;
        continue;
      }
      const double range = double(image.at(Channel::Range, row, col)) * max_range;
      const double cos_theta = image.at(Channel::Incidence, row, col);
      if (!(range > 0.0) || !(cos_theta > 0.0)) {
        throw Error(ErrorKind::MissingChannels,
                    "pixel (" + std::to_string(row) + ", " + std::to_string(col) +
                        ") lacks range or incidence");
      }
      const double reflectance = image.at(Channel::Reflectance, row, col);
      const double reference =
          attenuate(physics_intensity(range, cos_theta, reflectance), range, params);
      out.at(Channel::Intensity, row, col) = float(reference);
    }
  }
  return out;
}

}  // namespace realitygen::physics

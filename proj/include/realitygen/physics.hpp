#pragma once

#include "realitygen/material.hpp"
#include "realitygen/projection.hpp"

namespace realitygen::physics {

enum class WeatherKind { Clear, Rain, Snow };

/// Two-way atmospheric extinction for one weather condition.
struct AttenuationParams {
  double alpha = 0.0;  // extinction coefficient, 1/m
  WeatherKind weather = WeatherKind::Clear;

  static AttenuationParams clear() { return {}; }
  /// Throws Error{InvalidArgument} for alpha < 0 or a clear sky with alpha != 0.
  static AttenuationParams make(WeatherKind weather, double alpha);
};

/// Reference intensity MR * cos(theta) / R, clamped to [0, 1]. Range in meters.
/// Throws Error{NonPositiveRange}.
double physics_intensity(double range, double cos_incidence, double reflectance);

/// Beer-Lambert two-way loss: intensity * exp(-2 * alpha * range).
double attenuate(double intensity, double range, const AttenuationParams& params);

/// Replaces the intensity channel of every occupied pixel with the physics
/// reference (attenuated when params carry weather). Range is recovered in
/// meters from the normalized channel. Throws Error{MissingChannels} when an
/// occupied pixel has no range or incidence.
projection::RangeImage reference_image(const projection::RangeImage& image,
                                       const AttenuationParams& params);

}  // namespace realitygen::physics

#pragma once

#include <span>

#include "realitygen/projection.hpp"

namespace realitygen::metrics {

inline constexpr double kScoreEpsilon = 1e-7;

struct LossWeights {
  double lambda_cycle = 10.0;
  double lambda_phy = 1.0;

  /// Throws Error{InvalidArgument} unless both weights are finite and >= 0.
  void validate() const;
};

/// mean(log D(real)) + mean(log(1 - D(fake))) with scores clamped to
/// [eps, 1 - eps]. The grids may differ in size. Throws Error{EmptyMask}
/// when either is empty.
double adversarial_score(std::span<const float> real_scores, std::span<const float> fake_scores);

/// Mean L1 intensity difference over masked pixels. Masks must match.
/// Throws Error{ShapeMismatch, MaskMismatch, EmptyMask}.
double cycle_loss(const projection::RangeImage& original,
                  const projection::RangeImage& reconstructed);

/// Mean absolute intensity difference over pixels masked in either image.
/// Throws Error{ShapeMismatch, EmptyMask}.
double physics_loss(const projection::RangeImage& predicted,
                    const projection::RangeImage& reference);

double total_objective(double adversarial, double cycle, double physics, const LossWeights& w);

/// 1-Wasserstein distance between the masked-pixel intensity histograms.
/// Intensities are binned to the nearest of `bins` evenly spaced support
/// points spanning [0, 1], so the distance of all-0 vs all-1 is exactly 1.
/// Throws Error{EmptyMask, InvalidArgument}.
double intensity_histogram_distance(const projection::RangeImage& a,
                                    const projection::RangeImage& b, int bins);

}  // namespace realitygen::metrics

#include "realitygen/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "realitygen/error.hpp"

namespace realitygen::metrics {

using projection::Channel;
using projection::RangeImage;

void LossWeights::validate() const {
  const auto ok = [](double v) { return std::isfinite(v) && v >= 0.0; };
  if (!ok(lambda_cycle) || !ok(lambda_phy)) {
    throw Error(ErrorKind::InvalidArgument, "loss weights must be finite and >= 0");
  }
}

namespace {

double mean_log(std::span<const float> scores, bool complement) {
  double sum = 0.0;
  for (float s : scores) {
    const double v = std::clamp(double(s), kScoreEpsilon, 1.0 - kScoreEpsilon);
    sum += std::log(complement ? 1.0 - v : v);
  }
  return sum / double(scores.size());
}

void require_same_shape(const RangeImage& a, const RangeImage& b) {
  if (!a.same_shape(b)) {
    throw Error(ErrorKind::ShapeMismatch,
                std::to_string(a.height()) + "x" + std::to_string(a.width()) + " vs " +
                    std::to_string(b.height()) + "x" + std::to_string(b.width()));
  }
}

std::vector<double> histogram(const RangeImage& image, int bins) {
  std::vector<double> mass(std::size_t(bins), 0.0);
  const auto mask = image.plane(Channel::Mask);
  const auto intensity = image.plane(Channel::Intensity);
  std::size_t count = 0;
  for (std::size_t k = 0; k < mask.size(); ++k) {
    if (mask[k] == 0.f) continue;
    const double v = std::clamp(double(intensity[k]), 0.0, 1.0);
    mass[std::size_t(std::lround(v * (bins - 1)))] += 1.0;
    ++count;
  }
  if (count == 0) throw Error(ErrorKind::EmptyMask, "image has no occupied pixels");
  for (double& m : mass) m /= double(count);
  return mass;
}

}  // namespace

double adversarial_score(std::span<const float> real_scores, std::span<const float> fake_scores) {
  if (real_scores.empty() || fake_scores.empty()) {
    throw Error(ErrorKind::EmptyMask, "discriminator score grid is empty");
  }
  return mean_log(real_scores, false) + mean_log(fake_scores, true);
}

double cycle_loss(const RangeImage& original, const RangeImage& reconstructed) {
  require_same_shape(original, reconstructed);
  const auto mask_a = original.plane(Channel::Mask);
  const auto mask_b = reconstructed.plane(Channel::Mask);
  if (!std::equal(mask_a.begin(), mask_a.end(), mask_b.begin())) {
    throw Error(ErrorKind::MaskMismatch, "cycle loss needs identical masks");
  }
  const auto a = original.plane(Channel::Intensity);
  const auto b = reconstructed.plane(Channel::Intensity);
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (mask_a[k] == 0.f) continue;
    sum += std::abs(double(a[k]) - double(b[k]));
    ++count;
  }
  if (count == 0) throw Error(ErrorKind::EmptyMask, "no occupied pixels");
  return sum / double(count);
}

double physics_loss(const RangeImage& predicted, const RangeImage& reference) {
  require_same_shape(predicted, reference);
  const auto mask_p = predicted.plane(Channel::Mask);
  const auto mask_r = reference.plane(Channel::Mask);
  const auto p = predicted.plane(Channel::Intensity);
  const auto r = reference.plane(Channel::Intensity);
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (mask_p[k] == 0.f && mask_r[k] == 0.f) continue;
    sum += std::abs(double(p[k]) - double(r[k]));
    ++count;
  }
  if (count == 0) throw Error(ErrorKind::EmptyMask, "no occupied pixels");
  return sum / double(count);
}

double total_objective(double adversarial, double cycle, double physics, const LossWeights& w) {
  return adversarial + w.lambda_cycle * cycle + w.lambda_phy * physics;
}

double intensity_histogram_distance(const RangeImage& a, const RangeImage& b, int bins) {
  if (bins < 2) throw Error(ErrorKind::InvalidArgument, "need at least 2 bins");
  const auto ha = histogram(a, bins);
  const auto hb = histogram(b, bins);
  // W1 on a 1-D grid: sum of |CDF_a - CDF_b| times the support spacing.
  const double spacing = 1.0 / double(bins - 1);
  double cdf_a = 0.0;
  double cdf_b = 0.0;
  double distance = 0.0;
  for (int k = 0; k + 1 < bins; ++k) {
    cdf_a += ha[std::size_t(k)];
    cdf_b += hb[std::size_t(k)];
    distance += std::abs(cdf_a - cdf_b) * spacing;
  }
  return distance;
}

}  // namespace realitygen::metrics

#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "semipso/dataset.hpp"
#include "semipso/rng.hpp"

namespace semipso {

/// Desk-scale stand-in for fundus images: dark, thin quadratic-Bezier
/// "vessels" over an unevenly lit, noisy three-channel background.
struct SyntheticConfig {
  int image_size = 32;
  int count = 20;
  int min_curves = 2;
  int max_curves = 4;
  double min_width = 1.0;  // px
  double max_width = 2.5;
  /// Control-point offset from the chord midpoint, as a fraction of chord length.
  double max_bend = 0.6;
  double min_contrast = 0.12;  // relative darkening of the vessel core
  double max_contrast = 0.35;
  double background_low = 0.45;
  double background_high = 0.75;
  double illumination = 0.25;  // peak-to-peak of the lighting ramp
  double noise_std = 0.06;
  int distractors = 2;  // soft dark blobs that are not vessels
  std::uint64_t seed = 0;

  void validate() const;
};

struct Curve {
  std::array<double, 2> p0;  // (x, y) in pixel units
  std::array<double, 2> p1;  // control point
  std::array<double, 2> p2;
  double width = 1.0;
  double contrast = 0.2;

  [[nodiscard]] std::array<double, 2> point(double t) const;
  /// Polyline length with `segments` pieces.
  [[nodiscard]] double length(int segments = 256) const;
};

std::vector<Curve> sample_curves(const SyntheticConfig& config, Rng& rng);

/// Distance from (x, y) to the curve, via a dense polyline.
double distance_to_curve(const Curve& curve, double x, double y);

/// Pixel (x, y) is foreground iff the distance from its centre to some curve
/// is at most width / 2.
Tensor4<double> rasterize_mask(const std::vector<Curve>& curves, int size);

/// One sample from item-specific substream `index`.
Sample generate_sample(const SyntheticConfig& config, std::uint64_t index);

/// `config.count` samples, all labeled (use split_labeled to partition).
Dataset generate_synthetic(const SyntheticConfig& config);

}  // namespace semipso

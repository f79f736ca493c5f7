#include "semipso/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "semipso/error.hpp"
#include "semipso/image_io.hpp"

namespace semipso {
namespace {

constexpr int kPolylineSegments = 64;

double segment_distance(double px, double py, std::array<double, 2> a, std::array<double, 2> b) {
  const double dx = b[0] - a[0];
  const double dy = b[1] - a[1];
  const double len2 = dx * dx + dy * dy;
  double t = len2 > 0 ? ((px - a[0]) * dx + (py - a[1]) * dy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  const double ex = a[0] + t * dx - px;
  const double ey = a[1] + t * dy - py;
  return std::sqrt(ex * ex + ey * ey);
}

std::array<double, 2> random_edge_point(Rng& rng, double size) {
  // Vessels enter from a random border so they cross the field of view.
  const double u = uniform(rng, 0.0, size);
  switch (uniform_index(rng, 4)) {
    case 0: return {u, 0.0};
    case 1: return {u, size};
    case 2: return {0.0, u};
    default: return {size, u};
  }
}

}  // namespace

void SyntheticConfig::validate() const {
  require(image_size >= 4, ErrorCode::kInvalidConfig, "synthetic image_size must be >= 4");
  require(count >= 1, ErrorCode::kInvalidConfig, "synthetic count must be >= 1");
  require(min_curves >= 0 && min_curves <= max_curves, ErrorCode::kInvalidConfig,
          "synthetic curve count range is empty");
  require(min_width > 0 && min_width <= max_width, ErrorCode::kInvalidConfig,
          "synthetic width range is empty or non-positive");
  require(max_bend >= 0, ErrorCode::kInvalidConfig, "synthetic max_bend must be >= 0");
  require(min_contrast > 0 && min_contrast <= max_contrast && max_contrast <= 1,
          ErrorCode::kInvalidConfig, "synthetic contrast range must lie in (0, 1]");
  require(background_low >= 0 && background_low <= background_high && background_high <= 1,
          ErrorCode::kInvalidConfig, "synthetic background range must lie in [0, 1]");
  require(illumination >= 0 && noise_std >= 0 && distractors >= 0, ErrorCode::kInvalidConfig,
          "synthetic illumination, noise and distractors must be nonnegative");
}

std::array<double, 2> Curve::point(double t) const {
  const double a = (1 - t) * (1 - t);
  const double b = 2 * (1 - t) * t;
  const double c = t * t;
  return {a * p0[0] + b * p1[0] + c * p2[0], a * p0[1] + b * p1[1] + c * p2[1]};
}

double Curve::length(int segments) const {
  double len = 0;
  auto prev = point(0.0);
  for (int i = 1; i <= segments; ++i) {
    const auto cur = point(static_cast<double>(i) / segments);
    len += std::hypot(cur[0] - prev[0], cur[1] - prev[1]);
    prev = cur;
  }
  return len;
}

std::vector<Curve> sample_curves(const SyntheticConfig& config, Rng& rng) {
  const double size = config.image_size;
  const int n = config.min_curves +
                static_cast<int>(uniform_index(
                    rng, static_cast<std::uint64_t>(config.max_curves - config.min_curves + 1)));
  std::vector<Curve> curves;
  for (int i = 0; i < n; ++i) {
    Curve c;
    c.p0 = random_edge_point(rng, size);
    c.p2 = random_edge_point(rng, size);
    const double mx = 0.5 * (c.p0[0] + c.p2[0]);
    const double my = 0.5 * (c.p0[1] + c.p2[1]);
    const double dx = c.p2[0] - c.p0[0];
    const double dy = c.p2[1] - c.p0[1];
    const double bend = uniform(rng, -config.max_bend, config.max_bend);
    // Offset along the chord normal.
    c.p1 = {mx - bend * dy, my + bend * dx};
    c.width = uniform(rng, config.min_width, config.max_width);
    c.contrast = uniform(rng, config.min_contrast, config.max_contrast);
    curves.push_back(c);
  }
  return curves;
}

double distance_to_curve(const Curve& curve, double x, double y) {
  double best = std::numeric_limits<double>::infinity();
  auto prev = curve.point(0.0);
  for (int i = 1; i <= kPolylineSegments; ++i) {
    const auto cur = curve.point(static_cast<double>(i) / kPolylineSegments);
    best = std::min(best, segment_distance(x, y, prev, cur));
    prev = cur;
  }
  return best;
}

Tensor4<double> rasterize_mask(const std::vector<Curve>& curves, int size) {
  Tensor4<double> mask(Shape4{1, 1, size, size});
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      for (const auto& c : curves) {
        if (distance_to_curve(c, x + 0.5, y + 0.5) <= 0.5 * c.width) {
          mask.at(0, 0, y, x) = 1.0;
          break;
        }
      }
    }
  }
  return mask;
}

Sample generate_sample(const SyntheticConfig& config, std::uint64_t index) {
  config.validate();
  Rng rng(derive_seed(config.seed, {index}));
  const int size = config.image_size;
  const auto curves = sample_curves(config, rng);

  // Fundus-like channel balance: strong red, medium green, weak blue.
  constexpr std::array<double, 3> kChannelGain{1.0, 0.7, 0.4};
  const double base = uniform(rng, config.background_low, config.background_high);
  const double angle = uniform(rng, 0.0, 2.0 * std::numbers::pi);
  const double gx = std::cos(angle);
  const double gy = std::sin(angle);

  struct Blob {
    double x, y, radius, depth;
  };
  std::vector<Blob> blobs;
  for (int i = 0; i < config.distractors; ++i) {
    blobs.push_back({uniform(rng, 0, size), uniform(rng, 0, size),
                     uniform(rng, 1.5, 0.15 * size + 1.5),
                     uniform(rng, 0.5 * config.min_contrast, config.max_contrast)});
  }

  Sample s;
  s.name = "synthetic_" + std::to_string(index);
  s.mask = rasterize_mask(curves, size);
  s.image = Tensor4<double>(Shape4{1, 3, size, size});
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      const double px = x + 0.5;
      const double py = y + 0.5;
      const double ramp = ((px / size - 0.5) * gx + (py / size - 0.5) * gy) * config.illumination;
      double shade = 1.0;
      for (const auto& c : curves) {
        // Soft edge in the image only; the mask stays hard.
        const double d = distance_to_curve(c, px, py);
        const double cover = std::clamp(0.5 * c.width + 0.5 - d, 0.0, 1.0);
        shade *= 1.0 - c.contrast * cover;
      }
      for (const auto& b : blobs) {
        const double r2 = ((px - b.x) * (px - b.x) + (py - b.y) * (py - b.y)) / (b.radius * b.radius);
        shade *= 1.0 - b.depth * std::exp(-r2);
      }
      for (int c = 0; c < 3; ++c) {
        const double v = (base + ramp) * kChannelGain[static_cast<std::size_t>(c)] * shade +
                         config.noise_std * standard_normal(rng);
        s.image.at(0, c, y, x) = std::clamp(v, 0.0, 1.0);
      }
    }
  }
  s.image = quantize8(s.image);
  return s;
}

Dataset generate_synthetic(const SyntheticConfig& config) {
  config.validate();
  Dataset ds;
  for (int i = 0; i < config.count; ++i) {
    ds.items.push_back(generate_sample(config, static_cast<std::uint64_t>(i)));
  }
  return all_labeled(std::move(ds));
}

}  // namespace semipso

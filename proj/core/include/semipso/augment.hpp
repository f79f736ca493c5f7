#pragma once

#include <utility>

#include "semipso/rng.hpp"
#include "semipso/tensor.hpp"

namespace semipso {

inline constexpr double kMinScale = 0.75;
inline constexpr double kMaxScale = 1.25;

template <Real T>
struct ImageMask {
  Tensor4<T> image;
  Tensor4<T> mask;
};

/// Resizes by `scale` (bilinear for the image, nearest for the mask), pads by
/// reflection when the result is smaller than `out_size`, then crops the
/// out_size x out_size window at (y0, x0). Offsets are clamped into range.
template <Real T>
ImageMask<T> scale_crop(const Tensor4<T>& image, const Tensor4<T>& mask, double scale, int y0,
                        int x0, int out_size);

/// Scale drawn from [kMinScale, kMaxScale], then a uniform crop offset (y before x).
template <Real T>
ImageMask<T> random_scale_crop(const Tensor4<T>& image, const Tensor4<T>& mask, int out_size,
                               Rng& rng);

}  // namespace semipso

#include "semipso/augment.hpp"

#include <algorithm>
#include <cmath>

#include "semipso/error.hpp"

namespace semipso {
namespace {

int reflect(int i, int n) {
  if (n == 1) return 0;
  const int period = 2 * (n - 1);
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - i;
}

template <Real T>
Tensor4<T> resize_bilinear(const Tensor4<T>& in, int oh, int ow) {
  const Shape4 s = in.shape();
  Tensor4<T> out(Shape4{s.n, s.c, oh, ow});
  const double sy = static_cast<double>(s.h) / oh;
  const double sx = static_cast<double>(s.w) / ow;
  for (int n = 0; n < s.n; ++n) {
    for (int c = 0; c < s.c; ++c) {
      for (int y = 0; y < oh; ++y) {
        const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, s.h - 1.0);
        const int y0 = static_cast<int>(fy);
        const int y1 = std::min(y0 + 1, s.h - 1);
        const double ly = fy - y0;
        for (int x = 0; x < ow; ++x) {
          const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, s.w - 1.0);
          const int x0 = static_cast<int>(fx);
          const int x1 = std::min(x0 + 1, s.w - 1);
          const double lx = fx - x0;
          const double top = in.at(n, c, y0, x0) * (1 - lx) + in.at(n, c, y0, x1) * lx;
          const double bot = in.at(n, c, y1, x0) * (1 - lx) + in.at(n, c, y1, x1) * lx;
          out.at(n, c, y, x) = static_cast<T>(top * (1 - ly) + bot * ly);
        }
      }
    }
  }
  return out;
}

template <Real T>
Tensor4<T> resize_nearest(const Tensor4<T>& in, int oh, int ow) {
  const Shape4 s = in.shape();
  Tensor4<T> out(Shape4{s.n, s.c, oh, ow});
  for (int n = 0; n < s.n; ++n) {
    for (int c = 0; c < s.c; ++c) {
      for (int y = 0; y < oh; ++y) {
        const int sy = std::min(static_cast<int>((y + 0.5) * s.h / oh), s.h - 1);
        for (int x = 0; x < ow; ++x) {
          const int sx = std::min(static_cast<int>((x + 0.5) * s.w / ow), s.w - 1);
          out.at(n, c, y, x) = in.at(n, c, sy, sx);
        }
      }
    }
  }
  return out;
}

// Window of `size` starting at (y0, x0), reflecting outside the source.
template <Real T>
Tensor4<T> crop_reflect(const Tensor4<T>& in, int y0, int x0, int size) {
  const Shape4 s = in.shape();
  Tensor4<T> out(Shape4{s.n, s.c, size, size});
  for (int n = 0; n < s.n; ++n) {
    for (int c = 0; c < s.c; ++c) {
      for (int y = 0; y < size; ++y) {
        const int sy = reflect(y0 + y, s.h);
        for (int x = 0; x < size; ++x) out.at(n, c, y, x) = in.at(n, c, sy, reflect(x0 + x, s.w));
      }
    }
  }
  return out;
}

}  // namespace

template <Real T>
ImageMask<T> scale_crop(const Tensor4<T>& image, const Tensor4<T>& mask, double scale, int y0,
                        int x0, int out_size) {
  const Shape4 s = image.shape();
  require(mask.shape() == Shape4{s.n, 1, s.h, s.w}, ErrorCode::kShapeMismatch,
          "scale_crop: mask " + mask.shape().str() + " does not match image " + s.str());
  require(scale > 0 && out_size >= 1, ErrorCode::kInvalidArgument,
          "scale_crop needs a positive scale and output size");
  const int sh = std::max(1, static_cast<int>(std::lround(s.h * scale)));
  const int sw = std::max(1, static_cast<int>(std::lround(s.w * scale)));
  const Tensor4<T> img = (sh == s.h && sw == s.w) ? image : resize_bilinear(image, sh, sw);
  const Tensor4<T> msk = (sh == s.h && sw == s.w) ? mask : resize_nearest(mask, sh, sw);
  y0 = std::clamp(y0, 0, std::max(0, sh - out_size));
  x0 = std::clamp(x0, 0, std::max(0, sw - out_size));
  return {crop_reflect(img, y0, x0, out_size), crop_reflect(msk, y0, x0, out_size)};
}

template <Real T>
ImageMask<T> random_scale_crop(const Tensor4<T>& image, const Tensor4<T>& mask, int out_size,
                               Rng& rng) {
  const Shape4 s = image.shape();
  const double scale = uniform(rng, kMinScale, kMaxScale);
  const int sh = std::max(1, static_cast<int>(std::lround(s.h * scale)));
  const int sw = std::max(1, static_cast<int>(std::lround(s.w * scale)));
  const int y0 = static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(std::max(0, sh - out_size) + 1)));
  const int x0 = static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(std::max(0, sw - out_size) + 1)));
  return scale_crop(image, mask, scale, y0, x0, out_size);
}

template ImageMask<float> scale_crop(const Tensor4<float>&, const Tensor4<float>&, double, int,
                                     int, int);
template ImageMask<double> scale_crop(const Tensor4<double>&, const Tensor4<double>&, double, int,
                                      int, int);
template ImageMask<float> random_scale_crop(const Tensor4<float>&, const Tensor4<float>&, int,
                                            Rng&);
template ImageMask<double> random_scale_crop(const Tensor4<double>&, const Tensor4<double>&, int,
                                             Rng&);

}  // namespace semipso

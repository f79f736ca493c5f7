#include "semipso/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "semipso/error.hpp"

namespace semipso {
namespace {

void check_geometry(ConvGeometry g) {
  require(g.stride >= 1, ErrorCode::kInvalidArgument,
          "convolution stride must be >= 1, got " + std::to_string(g.stride));
  require(g.padding >= 0, ErrorCode::kInvalidArgument,
          "convolution padding must be >= 0, got " + std::to_string(g.padding));
}

// Range of output columns whose input column ox*s + kx - p lands in [0, in_w).
struct Span1 {
  int lo;
  int hi;  // inclusive; lo > hi when empty
};

Span1 valid_outputs(int in, int out, int k_off, ConvGeometry g) {
  const int shift = g.padding - k_off;
  const int lo = shift <= 0 ? 0 : (shift + g.stride - 1) / g.stride;
  const int num = in - 1 + shift;
  const int hi = num < 0 ? -1 : std::min(num / g.stride, out - 1);
  return {lo, hi};
}

struct ConvDims {
  int n, ci, h, w, co, kh, kw, oh, ow;
};

template <Real T>
ConvDims conv_dims(const Shape4& in, const Shape4& k, ConvGeometry g) {
  check_geometry(g);
  if (in.c != k.c) {
    fail(ErrorCode::kShapeMismatch, "conv2d: input " + in.str() + " has " + std::to_string(in.c) +
                                        " channels but kernel " + k.str() + " expects " +
                                        std::to_string(k.c));
  }
  require(k.h >= 1 && k.w >= 1 && k.n >= 1, ErrorCode::kInvalidArgument,
          "conv2d: empty kernel " + k.str());
  return {in.n, in.c, in.h, in.w, k.n, k.h, k.w, conv_output_size(in.h, k.h, g),
          conv_output_size(in.w, k.w, g)};
}

}  // namespace

int conv_output_size(int in, int kernel, ConvGeometry g) {
  check_geometry(g);
  const int span = in + 2 * g.padding - kernel;
  require(span >= 0, ErrorCode::kInvalidArgument,
          "convolution output dimension would be non-positive (input " + std::to_string(in) +
              ", kernel " + std::to_string(kernel) + ", padding " + std::to_string(g.padding) +
              ")");
  return span / g.stride + 1;
}

int transposed_conv_output_size(int in, int kernel, ConvGeometry g) {
  check_geometry(g);
  const int out = (in - 1) * g.stride - 2 * g.padding + kernel;
  require(out >= 1 && in >= 1, ErrorCode::kInvalidArgument,
          "transposed convolution output dimension would be non-positive (input " +
              std::to_string(in) + ", kernel " + std::to_string(kernel) + ")");
  return out;
}

template <Real T>
Tensor4<T> conv2d_forward(const Tensor4<T>& input, const Tensor4<T>& kernel, ConvGeometry g) {
  const ConvDims d = conv_dims<T>(input.shape(), kernel.shape(), g);
  Tensor4<T> out(Shape4{d.n, d.co, d.oh, d.ow});
  for (int n = 0; n < d.n; ++n) {
    for (int oc = 0; oc < d.co; ++oc) {
      T* o = &out.at(n, oc, 0, 0);
      for (int ic = 0; ic < d.ci; ++ic) {
        const T* in = &input.at(n, ic, 0, 0);
        const T* kk = &kernel.at(oc, ic, 0, 0);
        for (int ky = 0; ky < d.kh; ++ky) {
          const Span1 rows = valid_outputs(d.h, d.oh, ky, g);
          for (int kx = 0; kx < d.kw; ++kx) {
            const T wgt = kk[ky * d.kw + kx];
            const Span1 cols = valid_outputs(d.w, d.ow, kx, g);
            for (int oy = rows.lo; oy <= rows.hi; ++oy) {
              const T* row = in + static_cast<std::ptrdiff_t>(oy * g.stride + ky - g.padding) * d.w;
              T* orow = o + static_cast<std::ptrdiff_t>(oy) * d.ow;
              const int off = kx - g.padding;
              if (g.stride == 1) {
                for (int ox = cols.lo; ox <= cols.hi; ++ox) orow[ox] += wgt * row[ox + off];
              } else {
                for (int ox = cols.lo; ox <= cols.hi; ++ox) orow[ox] += wgt * row[ox * g.stride + off];
              }
            }
          }
        }
      }
    }
  }
  return out;
}

template <Real T>
void conv2d_backward_input(const Tensor4<T>& out_grad, const Tensor4<T>& kernel, ConvGeometry g,
                           Tensor4<T>& input_grad) {
  const ConvDims d = conv_dims<T>(input_grad.shape(), kernel.shape(), g);
  require_same_shape(out_grad.shape(), Shape4{d.n, d.co, d.oh, d.ow}, "conv2d backward");
  for (int n = 0; n < d.n; ++n) {
    for (int oc = 0; oc < d.co; ++oc) {
      const T* go = &out_grad.at(n, oc, 0, 0);
      for (int ic = 0; ic < d.ci; ++ic) {
        T* gi = &input_grad.at(n, ic, 0, 0);
        const T* kk = &kernel.at(oc, ic, 0, 0);
        for (int ky = 0; ky < d.kh; ++ky) {
          const Span1 rows = valid_outputs(d.h, d.oh, ky, g);
          for (int kx = 0; kx < d.kw; ++kx) {
            const T wgt = kk[ky * d.kw + kx];
            const Span1 cols = valid_outputs(d.w, d.ow, kx, g);
            const int off = kx - g.padding;
            for (int oy = rows.lo; oy <= rows.hi; ++oy) {
              T* row = gi + static_cast<std::ptrdiff_t>(oy * g.stride + ky - g.padding) * d.w;
              const T* grow = go + static_cast<std::ptrdiff_t>(oy) * d.ow;
              if (g.stride == 1) {
                for (int ox = cols.lo; ox <= cols.hi; ++ox) row[ox + off] += wgt * grow[ox];
              } else {
                for (int ox = cols.lo; ox <= cols.hi; ++ox) row[ox * g.stride + off] += wgt * grow[ox];
              }
            }
          }
        }
      }
    }
  }
}

template <Real T>
void conv2d_backward_kernel(const Tensor4<T>& input, const Tensor4<T>& out_grad, ConvGeometry g,
                            Tensor4<T>& kernel_grad) {
  const ConvDims d = conv_dims<T>(input.shape(), kernel_grad.shape(), g);
  require_same_shape(out_grad.shape(), Shape4{d.n, d.co, d.oh, d.ow}, "conv2d backward");
  for (int n = 0; n < d.n; ++n) {
    for (int oc = 0; oc < d.co; ++oc) {
      const T* go = &out_grad.at(n, oc, 0, 0);
      for (int ic = 0; ic < d.ci; ++ic) {
        const T* in = &input.at(n, ic, 0, 0);
        T* gk = &kernel_grad.at(oc, ic, 0, 0);
        for (int ky = 0; ky < d.kh; ++ky) {
          const Span1 rows = valid_outputs(d.h, d.oh, ky, g);
          for (int kx = 0; kx < d.kw; ++kx) {
            const Span1 cols = valid_outputs(d.w, d.ow, kx, g);
            const int off = kx - g.padding;
            T acc = 0;
            for (int oy = rows.lo; oy <= rows.hi; ++oy) {
              const T* row = in + static_cast<std::ptrdiff_t>(oy * g.stride + ky - g.padding) * d.w;
              const T* grow = go + static_cast<std::ptrdiff_t>(oy) * d.ow;
              if (g.stride == 1) {
                for (int ox = cols.lo; ox <= cols.hi; ++ox) acc += grow[ox] * row[ox + off];
              } else {
                for (int ox = cols.lo; ox <= cols.hi; ++ox) acc += grow[ox] * row[ox * g.stride + off];
              }
            }
            gk[ky * d.kw + kx] += acc;
          }
        }
      }
    }
  }
}

template <Real T>
Tensor4<T> transposed_conv2d_forward(const Tensor4<T>& input, const Tensor4<T>& kernel,
                                     ConvGeometry g) {
  const Shape4& in = input.shape();
  const Shape4& k = kernel.shape();
  if (in.c != k.n) {
    fail(ErrorCode::kShapeMismatch, "transposed_conv2d: input " + in.str() + " has " +
                                        std::to_string(in.c) + " channels but kernel " + k.str() +
                                        " expects " + std::to_string(k.n));
  }
  Tensor4<T> out(Shape4{in.n, k.c, transposed_conv_output_size(in.h, k.h, g),
                        transposed_conv_output_size(in.w, k.w, g)});
  conv2d_backward_input(input, kernel, g, out);
  return out;
}

namespace {

struct LerpTap {
  int i0;
  int i1;
  double frac;
};

std::vector<LerpTap> lerp_taps(int in, int out) {
  std::vector<LerpTap> taps(static_cast<std::size_t>(out));
  const double scale = static_cast<double>(in) / static_cast<double>(out);
  for (int o = 0; o < out; ++o) {
    double src = (o + 0.5) * scale - 0.5;
    src = std::clamp(src, 0.0, static_cast<double>(in - 1));
    const int i0 = static_cast<int>(std::floor(src));
    const int i1 = std::min(i0 + 1, in - 1);
    taps[static_cast<std::size_t>(o)] = {i0, i1, src - i0};
  }
  return taps;
}

void check_upsample(const Shape4& s, int out_h, int out_w) {
  require(s.h >= 1 && s.w >= 1, ErrorCode::kInvalidArgument,
          "upsample_bilinear: empty input " + s.str());
  require(out_h >= s.h && out_w >= s.w, ErrorCode::kInvalidArgument,
          "upsample_bilinear: downscaling " + s.str() + " to " + std::to_string(out_h) + "x" +
              std::to_string(out_w) + " is not supported");
}

}  // namespace

template <Real T>
Tensor4<T> upsample_bilinear_forward(const Tensor4<T>& input, int out_h, int out_w) {
  const Shape4& s = input.shape();
  check_upsample(s, out_h, out_w);
  const auto ty = lerp_taps(s.h, out_h);
  const auto tx = lerp_taps(s.w, out_w);
  Tensor4<T> out(Shape4{s.n, s.c, out_h, out_w});
  for (int n = 0; n < s.n; ++n) {
    for (int c = 0; c < s.c; ++c) {
      const T* in = &input.at(n, c, 0, 0);
      T* o = &out.at(n, c, 0, 0);
      for (int y = 0; y < out_h; ++y) {
        const LerpTap& a = ty[static_cast<std::size_t>(y)];
        const T fy = static_cast<T>(a.frac);
        for (int x = 0; x < out_w; ++x) {
          const LerpTap& b = tx[static_cast<std::size_t>(x)];
          const T fx = static_cast<T>(b.frac);
          const T top = in[a.i0 * s.w + b.i0] * (1 - fx) + in[a.i0 * s.w + b.i1] * fx;
          const T bot = in[a.i1 * s.w + b.i0] * (1 - fx) + in[a.i1 * s.w + b.i1] * fx;
          o[y * out_w + x] = top * (1 - fy) + bot * fy;
        }
      }
    }
  }
  return out;
}

template <Real T>
Var<T> conv2d(Var<T> input, Var<T> kernel, ConvGeometry g) {
  Tape<T>& tape = *input.tape;
  Tensor4<T> out = conv2d_forward(input.value(), kernel.value(), g);
  const std::size_t xi = input.id;
  const std::size_t ki = kernel.id;
  const bool x_grad = tape.requires_grad(input);
  const bool k_grad = tape.requires_grad(kernel);
  return tape.record(std::move(out), {input, kernel},
                     [xi, ki, g, x_grad, k_grad](Tape<T>& t, const Tensor4<T>& gy) {
                       const Tensor4<T>& x = t.value(Var<T>{&t, xi});
                       const Tensor4<T>& k = t.value(Var<T>{&t, ki});
                       if (x_grad) conv2d_backward_input(gy, k, g, t.grad_buffer(xi));
                       if (k_grad) conv2d_backward_kernel(x, gy, g, t.grad_buffer(ki));
                     });
}

template <Real T>
Var<T> transposed_conv2d(Var<T> input, Var<T> kernel, ConvGeometry g) {
  Tape<T>& tape = *input.tape;
  Tensor4<T> out = transposed_conv2d_forward(input.value(), kernel.value(), g);
  const std::size_t yi = input.id;
  const std::size_t ki = kernel.id;
  const bool y_grad = tape.requires_grad(input);
  const bool k_grad = tape.requires_grad(kernel);
  return tape.record(std::move(out), {input, kernel},
                     [yi, ki, g, y_grad, k_grad](Tape<T>& t, const Tensor4<T>& gout) {
                       const Tensor4<T>& y = t.value(Var<T>{&t, yi});
                       const Tensor4<T>& k = t.value(Var<T>{&t, ki});
                       if (y_grad) {
                         const Tensor4<T> gy = conv2d_forward(gout, k, g);
                         Tensor4<T>& dst = t.grad_buffer(yi);
                         for (std::size_t i = 0; i < dst.numel(); ++i) dst[i] += gy[i];
                       }
                       if (k_grad) conv2d_backward_kernel(gout, y, g, t.grad_buffer(ki));
                     });
}

template <Real T>
Var<T> add_bias(Var<T> input, Var<T> bias) {
  const Shape4& s = input.shape();
  const Shape4& b = bias.shape();
  require(b.n == 1 && b.c == s.c && b.h == 1 && b.w == 1, ErrorCode::kShapeMismatch,
          "add_bias: bias " + b.str() + " does not match input " + s.str());
  Tensor4<T> out = input.value();
  const std::size_t plane = static_cast<std::size_t>(s.h) * s.w;
  for (int n = 0; n < s.n; ++n) {
    for (int c = 0; c < s.c; ++c) {
      T* o = &out.at(n, c, 0, 0);
      const T bc = bias.value()[static_cast<std::size_t>(c)];
      for (std::size_t i = 0; i < plane; ++i) o[i] += bc;
    }
  }
  const std::size_t xi = input.id;
  const std::size_t bi = bias.id;
  const bool x_grad = input.tape->requires_grad(input);
  const bool b_grad = input.tape->requires_grad(bias);
  return input.tape->record(std::move(out), {input, bias},
                            [xi, bi, s, plane, x_grad, b_grad](Tape<T>& t, const Tensor4<T>& gy) {
                              if (x_grad) {
                                Tensor4<T>& gx = t.grad_buffer(xi);
                                for (std::size_t i = 0; i < gy.numel(); ++i) gx[i] += gy[i];
                              }
                              if (b_grad) {
                                Tensor4<T>& gb = t.grad_buffer(bi);
                                for (int n = 0; n < s.n; ++n) {
                                  for (int c = 0; c < s.c; ++c) {
                                    const T* g = &gy.at(n, c, 0, 0);
                                    T acc = 0;
                                    for (std::size_t i = 0; i < plane; ++i) acc += g[i];
                                    gb[static_cast<std::size_t>(c)] += acc;
                                  }
                                }
                              }
                            });
}

template <Real T>
Var<T> upsample_bilinear(Var<T> input, int out_h, int out_w) {
  const Shape4 s = input.shape();
  Tensor4<T> out = upsample_bilinear_forward(input.value(), out_h, out_w);
  const std::size_t xi = input.id;
  return input.tape->record(
      std::move(out), {input}, [xi, s, out_h, out_w](Tape<T>& t, const Tensor4<T>& gy) {
        const auto ty = lerp_taps(s.h, out_h);
        const auto tx = lerp_taps(s.w, out_w);
        Tensor4<T>& gx = t.grad_buffer(xi);
        for (int n = 0; n < s.n; ++n) {
          for (int c = 0; c < s.c; ++c) {
            T* gi = &gx.at(n, c, 0, 0);
            const T* go = &gy.at(n, c, 0, 0);
            for (int y = 0; y < out_h; ++y) {
              const LerpTap& a = ty[static_cast<std::size_t>(y)];
              const T fy = static_cast<T>(a.frac);
              for (int x = 0; x < out_w; ++x) {
                const LerpTap& b = tx[static_cast<std::size_t>(x)];
                const T fx = static_cast<T>(b.frac);
                const T v = go[y * out_w + x];
                gi[a.i0 * s.w + b.i0] += v * (1 - fy) * (1 - fx);
                gi[a.i0 * s.w + b.i1] += v * (1 - fy) * fx;
                gi[a.i1 * s.w + b.i0] += v * fy * (1 - fx);
                gi[a.i1 * s.w + b.i1] += v * fy * fx;
              }
            }
          }
        }
      });
}

template <Real T>
Var<T> leaky_relu(Var<T> x, T slope) {
  require(slope >= 0 && slope < 1, ErrorCode::kInvalidArgument,
          "leaky_relu slope must lie in [0, 1)");
  Tensor4<T> out = x.value();
  for (auto& v : out.data()) v = v > 0 ? v : slope * v;
  const std::size_t xi = x.id;
  return x.tape->record(std::move(out), {x}, [xi, slope](Tape<T>& t, const Tensor4<T>& gy) {
    const Tensor4<T>& in = t.value(Var<T>{&t, xi});
    Tensor4<T>& gx = t.grad_buffer(xi);
    for (std::size_t i = 0; i < gy.numel(); ++i) gx[i] += in[i] > 0 ? gy[i] : slope * gy[i];
  });
}

template <Real T>
Var<T> sigmoid(Var<T> x) {
  // Keeps the output strictly inside (0, 1) even where exp under/overflows.
  constexpr T kLow = std::numeric_limits<T>::min();
  const T high = std::nextafter(T(1), T(0));
  Tensor4<T> out = x.value();
  for (auto& v : out.data()) {
    T s;
    if (v >= 0) {
      s = T(1) / (T(1) + std::exp(-v));
    } else {
      const T e = std::exp(v);
      s = e / (T(1) + e);
    }
    v = std::clamp(s, kLow, high);
  }
  const std::size_t xi = x.id;
  const std::size_t self = x.tape->size();
  return x.tape->record(std::move(out), {x}, [xi, self](Tape<T>& t, const Tensor4<T>& gy) {
    const Tensor4<T>& y = t.value(Var<T>{&t, self});
    Tensor4<T>& gx = t.grad_buffer(xi);
    for (std::size_t i = 0; i < gy.numel(); ++i) gx[i] += gy[i] * y[i] * (T(1) - y[i]);
  });
}

template <Real T>
Var<T> max_pool2x2(Var<T> x) {
  const Shape4 s = x.shape();
  require(s.h >= 2 && s.w >= 2 && s.h % 2 == 0 && s.w % 2 == 0, ErrorCode::kInvalidArgument,
          "max_pool2x2 needs even spatial dims, got " + s.str());
  const Shape4 os{s.n, s.c, s.h / 2, s.w / 2};
  Tensor4<T> out(os);
  std::vector<std::size_t> argmax(os.numel());
  const Tensor4<T>& in = x.value();
  std::size_t k = 0;
  for (int n = 0; n < s.n; ++n) {
    for (int c = 0; c < s.c; ++c) {
      for (int y = 0; y < os.h; ++y) {
        for (int xx = 0; xx < os.w; ++xx, ++k) {
          std::size_t best = in.offset(n, c, 2 * y, 2 * xx);
          for (int dy = 0; dy < 2; ++dy) {
            for (int dx = 0; dx < 2; ++dx) {
              const std::size_t idx = in.offset(n, c, 2 * y + dy, 2 * xx + dx);
              if (in[idx] > in[best]) best = idx;
            }
          }
          argmax[k] = best;
          out[k] = in[best];
        }
      }
    }
  }
  const std::size_t xi = x.id;
  return x.tape->record(std::move(out), {x},
                        [xi, argmax = std::move(argmax)](Tape<T>& t, const Tensor4<T>& gy) {
                          Tensor4<T>& gx = t.grad_buffer(xi);
                          for (std::size_t i = 0; i < gy.numel(); ++i) gx[argmax[i]] += gy[i];
                        });
}

template <Real T>
Var<T> concat_channels(Var<T> a, Var<T> b) {
  const Shape4 sa = a.shape();
  const Shape4 sb = b.shape();
  if (sa.n != sb.n || sa.h != sb.h || sa.w != sb.w) {
    fail(ErrorCode::kShapeMismatch,
         "concat_channels: shape mismatch " + sa.str() + " vs " + sb.str());
  }
  const std::size_t pa = static_cast<std::size_t>(sa.c) * sa.h * sa.w;
  const std::size_t pb = static_cast<std::size_t>(sb.c) * sb.h * sb.w;
  std::vector<T> out;
  out.reserve((pa + pb) * static_cast<std::size_t>(sa.n));
  for (int n = 0; n < sa.n; ++n) {
    const auto da = a.value().data().subspan(pa * static_cast<std::size_t>(n), pa);
    const auto db = b.value().data().subspan(pb * static_cast<std::size_t>(n), pb);
    out.insert(out.end(), da.begin(), da.end());
    out.insert(out.end(), db.begin(), db.end());
  }
  const std::size_t ai = a.id;
  const std::size_t bi = b.id;
  const bool a_grad = a.tape->requires_grad(a);
  const bool b_grad = a.tape->requires_grad(b);
  return a.tape->record(
      Tensor4<T>(Shape4{sa.n, sa.c + sb.c, sa.h, sa.w}, std::move(out)), {a, b},
      [ai, bi, pa, pb, n = sa.n, a_grad, b_grad](Tape<T>& t, const Tensor4<T>& gy) {
        for (int i = 0; i < n; ++i) {
          const std::size_t base = (pa + pb) * static_cast<std::size_t>(i);
          if (a_grad) {
            Tensor4<T>& ga = t.grad_buffer(ai);
            for (std::size_t j = 0; j < pa; ++j) ga[pa * static_cast<std::size_t>(i) + j] += gy[base + j];
          }
          if (b_grad) {
            Tensor4<T>& gb = t.grad_buffer(bi);
            for (std::size_t j = 0; j < pb; ++j) gb[pb * static_cast<std::size_t>(i) + j] += gy[base + pa + j];
          }
        }
      });
}

template <Real T>
Var<T> sum(Var<T> x) {
  const std::size_t xi = x.id;
  return x.tape->record(Tensor4<T>::scalar(x.value().sum()), {x},
                        [xi](Tape<T>& t, const Tensor4<T>& gy) {
                          Tensor4<T>& gx = t.grad_buffer(xi);
                          for (auto& v : gx.data()) v += gy[0];
                        });
}

template <Real T>
Var<T> weighted_sum(Var<T> x, const Tensor4<T>& weights) {
  const std::size_t xi = x.id;
  return x.tape->record(Tensor4<T>::scalar(dot(x.value(), weights)), {x},
                        [xi, weights](Tape<T>& t, const Tensor4<T>& gy) {
                          Tensor4<T>& gx = t.grad_buffer(xi);
                          for (std::size_t i = 0; i < gx.numel(); ++i) gx[i] += gy[0] * weights[i];
                        });
}

template <Real T>
Var<T> linear_combination(std::span<const Var<T>> terms, std::span<const T> coefficients) {
  require(!terms.empty() && terms.size() == coefficients.size(), ErrorCode::kInvalidArgument,
          "linear_combination: need one coefficient per term");
  Tape<T>& tape = *terms.front().tape;
  T acc = 0;
  std::vector<std::size_t> ids;
  std::vector<T> coefs(coefficients.begin(), coefficients.end());
  for (std::size_t i = 0; i < terms.size(); ++i) {
    require(terms[i].value().numel() == 1, ErrorCode::kNonScalarRoot,
            "linear_combination: term " + std::to_string(i) + " is not a scalar");
    acc = i == 0 ? coefs[i] * terms[i].value()[0] : acc + coefs[i] * terms[i].value()[0];
    ids.push_back(terms[i].id);
  }
  std::vector<Var<T>> inputs(terms.begin(), terms.end());
  return tape.record(Tensor4<T>::scalar(acc), inputs,
                     [ids = std::move(ids), coefs = std::move(coefs)](Tape<T>& t,
                                                                      const Tensor4<T>& gy) {
                       for (std::size_t i = 0; i < ids.size(); ++i) {
                         if (!t.requires_grad(Var<T>{&t, ids[i]})) continue;
                         t.grad_buffer(ids[i])[0] += coefs[i] * gy[0];
                       }
                     });
}

#define SEMIPSO_INSTANTIATE_OPS(T)                                                            \
  template Tensor4<T> conv2d_forward(const Tensor4<T>&, const Tensor4<T>&, ConvGeometry);    \
  template void conv2d_backward_input(const Tensor4<T>&, const Tensor4<T>&, ConvGeometry,    \
                                      Tensor4<T>&);                                           \
  template void conv2d_backward_kernel(const Tensor4<T>&, const Tensor4<T>&, ConvGeometry,   \
                                       Tensor4<T>&);                                          \
  template Tensor4<T> transposed_conv2d_forward(const Tensor4<T>&, const Tensor4<T>&,        \
                                                ConvGeometry);                                \
  template Tensor4<T> upsample_bilinear_forward(const Tensor4<T>&, int, int);                \
  template Var<T> conv2d(Var<T>, Var<T>, ConvGeometry);                                       \
  template Var<T> transposed_conv2d(Var<T>, Var<T>, ConvGeometry);                            \
  template Var<T> add_bias(Var<T>, Var<T>);                                                   \
  template Var<T> upsample_bilinear(Var<T>, int, int);                                        \
  template Var<T> leaky_relu(Var<T>, T);                                                      \
  template Var<T> sigmoid(Var<T>);                                                            \
  template Var<T> max_pool2x2(Var<T>);                                                        \
  template Var<T> concat_channels(Var<T>, Var<T>);                                            \
  template Var<T> sum(Var<T>);                                                                \
  template Var<T> weighted_sum(Var<T>, const Tensor4<T>&);                                    \
  template Var<T> linear_combination(std::span<const Var<T>>, std::span<const T>);

SEMIPSO_INSTANTIATE_OPS(float)
SEMIPSO_INSTANTIATE_OPS(double)

}  // namespace semipso

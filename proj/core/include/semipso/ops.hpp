#pragma once

#include <span>

#include "semipso/autodiff.hpp"
#include "semipso/tensor.hpp"

namespace semipso {

struct ConvGeometry {
  int stride = 1;
  int padding = 0;
};

/// Output spatial size of a cross-correlation; rejects non-positive results.
int conv_output_size(int in, int kernel, ConvGeometry g);
/// Output spatial size of the adjoint (transposed) convolution.
int transposed_conv_output_size(int in, int kernel, ConvGeometry g);

// Value kernels. Cross-correlation (no kernel flip); kernel layout is
// [out_channels, in_channels, kh, kw].

template <Real T>
Tensor4<T> conv2d_forward(const Tensor4<T>& input, const Tensor4<T>& kernel, ConvGeometry g);

/// Accumulates d(loss)/d(input) for a conv2d whose output gradient is `out_grad`.
template <Real T>
void conv2d_backward_input(const Tensor4<T>& out_grad, const Tensor4<T>& kernel, ConvGeometry g,
                           Tensor4<T>& input_grad);

/// Accumulates d(loss)/d(kernel).
template <Real T>
void conv2d_backward_kernel(const Tensor4<T>& input, const Tensor4<T>& out_grad, ConvGeometry g,
                            Tensor4<T>& kernel_grad);

/// Adjoint of conv2d with the same kernel and geometry: maps
/// [n, kernel.n, h, w] to [n, kernel.c, H, W].
template <Real T>
Tensor4<T> transposed_conv2d_forward(const Tensor4<T>& input, const Tensor4<T>& kernel,
                                     ConvGeometry g);

/// Bilinear resize with half-pixel centres: src = (dst + 0.5) * in/out - 0.5,
/// clamped to [0, in - 1]. Upscaling only.
template <Real T>
Tensor4<T> upsample_bilinear_forward(const Tensor4<T>& input, int out_h, int out_w);

// Differentiable ops on a tape.

template <Real T>
Var<T> conv2d(Var<T> input, Var<T> kernel, ConvGeometry g);

template <Real T>
Var<T> transposed_conv2d(Var<T> input, Var<T> kernel, ConvGeometry g);

/// Adds a per-channel bias of shape [1, C, 1, 1].
template <Real T>
Var<T> add_bias(Var<T> input, Var<T> bias);

template <Real T>
Var<T> upsample_bilinear(Var<T> input, int out_h, int out_w);

template <Real T>
Var<T> leaky_relu(Var<T> x, T slope);

template <Real T>
Var<T> sigmoid(Var<T> x);

/// 2x2 window, stride 2. Ties resolve to the first element in row-major order.
template <Real T>
Var<T> max_pool2x2(Var<T> x);

template <Real T>
Var<T> concat_channels(Var<T> a, Var<T> b);

template <Real T>
Var<T> sum(Var<T> x);

/// Sum of x * weights with `weights` held constant.
template <Real T>
Var<T> weighted_sum(Var<T> x, const Tensor4<T>& weights);

/// c[0]*terms[0] + c[1]*terms[1] + ... over scalar nodes, accumulated left to right.
template <Real T>
Var<T> linear_combination(std::span<const Var<T>> terms, std::span<const T> coefficients);

}  // namespace semipso

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "semipso/adam.hpp"
#include "semipso/autodiff.hpp"
#include "semipso/tensor.hpp"

namespace semipso {

/// Mini U-Net. Level l (0-based) has base_channels * 2^l channels; each level
/// is two 3x3 convs with Leaky-ReLU, 2x2 max pooling goes down, a 2x2 stride-2
/// transposed conv goes up and is concatenated with the encoder features of
/// the same resolution. A 1x1 conv and a sigmoid produce the probability map.
struct SegmenterConfig {
  int in_channels = 3;
  int base_channels = 8;
  int depth = 3;
  double slope = 0.2;

  void validate() const;
  /// Spatial dims must be multiples of this.
  [[nodiscard]] int divisor() const { return 1 << depth; }
};

/// Fully convolutional discriminator: 4x4 stride-2 convs (padding 1) with
/// Leaky-ReLU after all but the last, then bilinear upsampling of the logits to
/// the input size, then a sigmoid.
struct DiscriminatorConfig {
  std::vector<int> channels{8, 16, 32, 64, 1};
  int kernel = 4;
  int stride = 2;
  double slope = 0.2;

  [[nodiscard]] int layers() const { return static_cast<int>(channels.size()); }
  [[nodiscard]] int min_input() const { return 1 << layers(); }
  void validate() const;

  /// The {8,16,32,64,1} schedule truncated to `layers` layers (3..5), ending in 1.
  static DiscriminatorConfig toy(int layers);
  /// Deepest toy schedule (at most 5 layers) that fits a `size`-pixel input.
  static DiscriminatorConfig for_input(int size);
};

template <Real T>
struct NamedParam {
  std::string name;
  Tensor4<T> value;
  AdamState<T> adam;

  friend bool operator==(const NamedParam&, const NamedParam&) = default;
};

/// Ordered parameter list; order and names are fixed by the model config.
template <Real T>
struct ModelParams {
  std::vector<NamedParam<T>> items;

  [[nodiscard]] std::size_t size() const noexcept { return items.size(); }
  [[nodiscard]] std::size_t scalar_count() const noexcept;
  [[nodiscard]] const NamedParam<T>& at(const std::string& name) const;
  NamedParam<T>& at(const std::string& name);

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

/// Parameter leaves of one model on a tape, aligned with ModelParams::items.
template <Real T>
using BoundParams = std::vector<Var<T>>;

/// `trainable` selects parameter leaves (gradients) or constant leaves (frozen).
template <Real T>
BoundParams<T> bind(Tape<T>& tape, const ModelParams<T>& params, bool trainable);

template <Real T>
ModelParams<T> init_params(const SegmenterConfig& config, std::uint64_t seed);

template <Real T>
ModelParams<T> init_params(const DiscriminatorConfig& config, std::uint64_t seed);

/// Kaiming fan-in standard deviation for Leaky-ReLU with the given slope.
double kaiming_std(int fan_in, double slope);

struct SegmenterOptions {
  /// Level whose skip connection is replaced by zeros; -1 keeps all skips.
  int drop_skip = -1;
};

template <Real T>
Var<T> segmenter_forward(const SegmenterConfig& config, const BoundParams<T>& params,
                         Var<T> image, const SegmenterOptions& options = {});

template <Real T>
Var<T> discriminator_forward(const DiscriminatorConfig& config, const BoundParams<T>& params,
                             Var<T> prob_map);

/// Inference-only conveniences.
template <Real T>
Tensor4<T> segment(const SegmenterConfig& config, const ModelParams<T>& params,
                   const Tensor4<T>& image);

template <Real T>
Tensor4<T> discriminate(const DiscriminatorConfig& config, const ModelParams<T>& params,
                        const Tensor4<T>& prob_map);

}  // namespace semipso

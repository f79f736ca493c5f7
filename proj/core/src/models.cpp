#include "semipso/models.hpp"

#include <cmath>

#include "semipso/error.hpp"
#include "semipso/ops.hpp"
#include "semipso/rng.hpp"

namespace semipso {
namespace {

struct ParamSpec {
  std::string name;
  Shape4 shape;
  int fan_in = 0;  // 0 for biases
};

void add_conv(std::vector<ParamSpec>& out, const std::string& prefix, int out_c, int in_c,
              int k) {
  out.push_back({prefix + ".weight", Shape4{out_c, in_c, k, k}, in_c * k * k});
  out.push_back({prefix + ".bias", Shape4{1, out_c, 1, 1}, 0});
}

int level_channels(const SegmenterConfig& c, int level) { return c.base_channels << level; }

std::vector<ParamSpec> layout(const SegmenterConfig& c) {
  std::vector<ParamSpec> specs;
  int in_c = c.in_channels;
  for (int l = 0; l < c.depth; ++l) {
    const int ch = level_channels(c, l);
    add_conv(specs, "enc" + std::to_string(l) + ".conv1", ch, in_c, 3);
    add_conv(specs, "enc" + std::to_string(l) + ".conv2", ch, ch, 3);
    in_c = ch;
  }
  const int bottom = level_channels(c, c.depth);
  add_conv(specs, "bottleneck.conv1", bottom, in_c, 3);
  add_conv(specs, "bottleneck.conv2", bottom, bottom, 3);
  for (int l = c.depth - 1; l >= 0; --l) {
    const int ch = level_channels(c, l);
    const std::string p = "dec" + std::to_string(l);
    // Transposed kernel [in, out, 2, 2]; each output sees `in` taps at stride 2.
    specs.push_back({p + ".up.weight", Shape4{2 * ch, ch, 2, 2}, 2 * ch});
    specs.push_back({p + ".up.bias", Shape4{1, ch, 1, 1}, 0});
    add_conv(specs, p + ".conv1", ch, 2 * ch, 3);
    add_conv(specs, p + ".conv2", ch, ch, 3);
  }
  add_conv(specs, "head", 1, level_channels(c, 0), 1);
  return specs;
}

std::vector<ParamSpec> layout(const DiscriminatorConfig& c) {
  std::vector<ParamSpec> specs;
  int in_c = 1;
  for (int i = 0; i < c.layers(); ++i) {
    add_conv(specs, "disc" + std::to_string(i), c.channels[static_cast<std::size_t>(i)], in_c,
             c.kernel);
    in_c = c.channels[static_cast<std::size_t>(i)];
  }
  return specs;
}

template <Real T>
ModelParams<T> init_from(const std::vector<ParamSpec>& specs, double slope, std::uint64_t seed) {
  Rng rng(seed);
  ModelParams<T> params;
  for (const auto& s : specs) {
    Tensor4<T> value(s.shape);
    if (s.fan_in > 0) {
      const double bound = std::sqrt(3.0) * kaiming_std(s.fan_in, slope);
      for (auto& v : value.data()) v = static_cast<T>(uniform(rng, -bound, bound));
    }
    params.items.push_back(NamedParam<T>{s.name, std::move(value), AdamState<T>(s.shape)});
  }
  return params;
}

template <Real T>
class Cursor {
 public:
  explicit Cursor(const BoundParams<T>& params) : params_(params) {}
  Var<T> next() {
    require(pos_ < params_.size(), ErrorCode::kInvalidArgument,
            "model parameters do not match the configuration");
    return params_[pos_++];
  }
  void finish() const {
    require(pos_ == params_.size(), ErrorCode::kInvalidArgument,
            "model parameters do not match the configuration");
  }

 private:
  const BoundParams<T>& params_;
  std::size_t pos_ = 0;
};

template <Real T>
Var<T> conv_block(Cursor<T>& cur, Var<T> x, ConvGeometry g) {
  const Var<T> w = cur.next();
  const Var<T> b = cur.next();
  return add_bias(conv2d(x, w, g), b);
}

}  // namespace

void SegmenterConfig::validate() const {
  require(in_channels >= 1, ErrorCode::kInvalidConfig, "segmenter in_channels must be >= 1");
  require(base_channels >= 1, ErrorCode::kInvalidConfig, "segmenter base_channels must be >= 1");
  require(depth >= 1 && depth <= 8, ErrorCode::kInvalidConfig, "segmenter depth must be in 1..8");
  require(slope >= 0 && slope < 1, ErrorCode::kInvalidConfig, "leaky slope must be in [0,1)");
}

void DiscriminatorConfig::validate() const {
  require(layers() >= 1, ErrorCode::kInvalidConfig, "discriminator needs at least one layer");
  require(channels.back() == 1, ErrorCode::kInvalidConfig,
          "discriminator last layer must have 1 output channel");
  for (int c : channels) {
    require(c >= 1, ErrorCode::kInvalidConfig, "discriminator channel counts must be >= 1");
  }
  require(kernel == 4 && stride == 2, ErrorCode::kInvalidConfig,
          "discriminator layers are 4x4 stride-2 convolutions");
  require(slope >= 0 && slope < 1, ErrorCode::kInvalidConfig, "leaky slope must be in [0,1)");
}

DiscriminatorConfig DiscriminatorConfig::toy(int layers) {
  require(layers >= 3 && layers <= 5, ErrorCode::kInvalidConfig,
          "toy discriminator depth must be 3..5, got " + std::to_string(layers));
  DiscriminatorConfig c;
  c.channels.assign({8, 16, 32, 64});
  c.channels.resize(static_cast<std::size_t>(layers - 1));
  c.channels.push_back(1);
  return c;
}

DiscriminatorConfig DiscriminatorConfig::for_input(int size) {
  int layers = 5;
  while (layers > 3 && (1 << layers) > size) --layers;
  require((1 << layers) <= size, ErrorCode::kInvalidConfig,
          "inputs of " + std::to_string(size) + " px are too small for a 3-layer discriminator");
  return toy(layers);
}

double kaiming_std(int fan_in, double slope) {
  const double gain = std::sqrt(2.0 / (1.0 + slope * slope));
  return gain / std::sqrt(static_cast<double>(fan_in));
}

template <Real T>
std::size_t ModelParams<T>::scalar_count() const noexcept {
  std::size_t n = 0;
  for (const auto& p : items) n += p.value.numel();
  return n;
}

template <Real T>
const NamedParam<T>& ModelParams<T>::at(const std::string& name) const {
  for (const auto& p : items) {
    if (p.name == name) return p;
  }
  fail(ErrorCode::kInvalidArgument, "no parameter named '" + name + "'");
}

template <Real T>
NamedParam<T>& ModelParams<T>::at(const std::string& name) {
  for (auto& p : items) {
    if (p.name == name) return p;
  }
  fail(ErrorCode::kInvalidArgument, "no parameter named '" + name + "'");
}

template <Real T>
BoundParams<T> bind(Tape<T>& tape, const ModelParams<T>& params, bool trainable) {
  BoundParams<T> out;
  out.reserve(params.size());
  for (const auto& p : params.items) {
    out.push_back(trainable ? tape.parameter(p.value) : tape.constant(p.value));
  }
  return out;
}

template <Real T>
ModelParams<T> init_params(const SegmenterConfig& config, std::uint64_t seed) {
  config.validate();
  return init_from<T>(layout(config), config.slope, seed);
}

template <Real T>
ModelParams<T> init_params(const DiscriminatorConfig& config, std::uint64_t seed) {
  config.validate();
  return init_from<T>(layout(config), config.slope, seed);
}

template <Real T>
Var<T> segmenter_forward(const SegmenterConfig& config, const BoundParams<T>& params,
                         Var<T> image, const SegmenterOptions& options) {
  config.validate();
  const Shape4 s = image.shape();
  require(s.c == config.in_channels, ErrorCode::kShapeMismatch,
          "segmenter expects " + std::to_string(config.in_channels) + " input channels, got " +
              s.str());
  const int div = config.divisor();
  require(s.h >= div && s.w >= div && s.h % div == 0 && s.w % div == 0,
          ErrorCode::kShapeMismatch,
          "segmenter input " + s.str() + " must have spatial dims divisible by " +
              std::to_string(div));

  const T slope = static_cast<T>(config.slope);
  const ConvGeometry same{1, 1};
  Cursor<T> cur(params);
  std::vector<Var<T>> skips;
  Var<T> x = image;
  for (int l = 0; l < config.depth; ++l) {
    x = leaky_relu(conv_block(cur, x, same), slope);
    x = leaky_relu(conv_block(cur, x, same), slope);
    skips.push_back(x);
    x = max_pool2x2(x);
  }
  x = leaky_relu(conv_block(cur, x, same), slope);
  x = leaky_relu(conv_block(cur, x, same), slope);
  for (int l = config.depth - 1; l >= 0; --l) {
    const Var<T> up_w = cur.next();
    const Var<T> up_b = cur.next();
    x = add_bias(transposed_conv2d(x, up_w, ConvGeometry{2, 0}), up_b);
    Var<T> skip = skips[static_cast<std::size_t>(l)];
    if (options.drop_skip == l) skip = image.tape->constant(Tensor4<T>(skip.shape()));
    x = concat_channels(skip, x);
    x = leaky_relu(conv_block(cur, x, same), slope);
    x = leaky_relu(conv_block(cur, x, same), slope);
  }
  x = conv_block(cur, x, ConvGeometry{1, 0});
  cur.finish();
  return sigmoid(x);
}

template <Real T>
Var<T> discriminator_forward(const DiscriminatorConfig& config, const BoundParams<T>& params,
                             Var<T> prob_map) {
  config.validate();
  const Shape4 s = prob_map.shape();
  require(s.c == 1, ErrorCode::kShapeMismatch,
          "discriminator expects a 1-channel map, got " + s.str());
  require(s.h >= config.min_input() && s.w >= config.min_input(), ErrorCode::kInvalidArgument,
          "discriminator input " + s.str() + " is too small for " +
              std::to_string(config.layers()) + " stride-2 layers (need >= " +
              std::to_string(config.min_input()) + " px)");
  const T slope = static_cast<T>(config.slope);
  const ConvGeometry g{config.stride, 1};
  Cursor<T> cur(params);
  Var<T> x = prob_map;
  for (int i = 0; i < config.layers(); ++i) {
    x = conv_block(cur, x, g);
    if (i + 1 < config.layers()) x = leaky_relu(x, slope);
  }
  cur.finish();
  return sigmoid(upsample_bilinear(x, s.h, s.w));
}

template <Real T>
Tensor4<T> segment(const SegmenterConfig& config, const ModelParams<T>& params,
                   const Tensor4<T>& image) {
  Tape<T> tape;
  const auto bound = bind(tape, params, false);
  return segmenter_forward(config, bound, tape.constant(image)).value();
}

template <Real T>
Tensor4<T> discriminate(const DiscriminatorConfig& config, const ModelParams<T>& params,
                        const Tensor4<T>& prob_map) {
  Tape<T> tape;
  const auto bound = bind(tape, params, false);
  return discriminator_forward(config, bound, tape.constant(prob_map)).value();
}

#define SEMIPSO_INSTANTIATE_MODELS(T)                                                         \
  template struct ModelParams<T>;                                                             \
  template BoundParams<T> bind(Tape<T>&, const ModelParams<T>&, bool);                        \
  template ModelParams<T> init_params<T>(const SegmenterConfig&, std::uint64_t);              \
  template ModelParams<T> init_params<T>(const DiscriminatorConfig&, std::uint64_t);          \
  template Var<T> segmenter_forward(const SegmenterConfig&, const BoundParams<T>&, Var<T>,    \
                                    const SegmenterOptions&);                                 \
  template Var<T> discriminator_forward(const DiscriminatorConfig&, const BoundParams<T>&,    \
                                        Var<T>);                                              \
  template Tensor4<T> segment(const SegmenterConfig&, const ModelParams<T>&,                  \
                              const Tensor4<T>&);                                             \
  template Tensor4<T> discriminate(const DiscriminatorConfig&, const ModelParams<T>&,         \
                                   const Tensor4<T>&);

SEMIPSO_INSTANTIATE_MODELS(float)
SEMIPSO_INSTANTIATE_MODELS(double)

}  // namespace semipso

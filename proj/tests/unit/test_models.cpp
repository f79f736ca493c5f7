#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>

#include "oracles.hpp"
#include "semipso/error.hpp"
#include "semipso/models.hpp"
#include "semipso/ops.hpp"

using namespace semipso;

namespace {

template <typename P>
void zero_param(P& params, const std::string& name) {
  for (auto& v : params.at(name).value.data()) v = 0;
}

bool strictly_inside_unit(const Tensor4<double>& t) {
  for (double v : t.data()) {
    if (!(v > 0 && v < 1)) return false;
  }
  return true;
}

}  // namespace

TEST(Segmenter, ShapeAndRange) {
  std::mt19937_64 rng(1);
  SegmenterConfig cfg;
  const auto params = init_params<double>(cfg, 7);
  const auto x = oracle::random_tensor(Shape4{2, 3, 16, 16}, rng, 0, 1);
  const auto y = segment(cfg, params, x);
  EXPECT_EQ(y.shape(), (Shape4{2, 1, 16, 16}));
  EXPECT_TRUE(strictly_inside_unit(y));
}

TEST(Segmenter, ZeroHeadGivesHalf) {
  std::mt19937_64 rng(2);
  SegmenterConfig cfg;
  cfg.depth = 2;
  auto params = init_params<double>(cfg, 3);
  zero_param(params, "head.weight");
  const auto y = segment(cfg, params, oracle::random_tensor(Shape4{1, 3, 8, 8}, rng));
  for (double v : y.data()) EXPECT_EQ(v, 0.5);
}

TEST(Segmenter, IndivisibleInputNamesDivisor) {
  SegmenterConfig cfg;
  const auto params = init_params<double>(cfg, 1);
  try {
    (void)segment(cfg, params, Tensor4<double>(Shape4{1, 3, 12, 12}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kShapeMismatch);
    EXPECT_NE(std::string(e.what()).find("8"), std::string::npos);
  }
}

TEST(Segmenter, SkipConnectionsAreLive) {
  std::mt19937_64 rng(4);
  SegmenterConfig cfg;
  cfg.depth = 2;
  const auto params = init_params<double>(cfg, 5);
  const auto x = oracle::random_tensor(Shape4{1, 3, 8, 8}, rng, 0, 1);
  for (int level = 0; level < cfg.depth; ++level) {
    Tape<double> a;
    Tape<double> b;
    const auto full = segmenter_forward(cfg, bind(a, params, false), a.constant(x)).value();
    const auto dropped =
        segmenter_forward(cfg, bind(b, params, false), b.constant(x), SegmenterOptions{level}).value();
    EXPECT_NE(full, dropped) << "level " << level;
  }
}

TEST(Segmenter, ParameterNamesUniqueAndOrdered) {
  SegmenterConfig cfg;
  const auto p = init_params<float>(cfg, 0);
  std::set<std::string> names;
  for (const auto& item : p.items) names.insert(item.name);
  EXPECT_EQ(names.size(), p.size());
  EXPECT_EQ(p.items.front().name, "enc0.conv1.weight");
  EXPECT_EQ(p.items.back().name, "head.bias");
  EXPECT_EQ(p.at("enc0.conv1.weight").value.shape(), (Shape4{8, 3, 3, 3}));
  EXPECT_EQ(p.at("dec0.up.weight").value.shape(), (Shape4{16, 8, 2, 2}));
  EXPECT_EQ(p.at("dec0.conv1.weight").value.shape(), (Shape4{8, 16, 3, 3}));
}

TEST(Segmenter, ForwardIsDeterministic) {
  std::mt19937_64 rng(6);
  SegmenterConfig cfg;
  const auto params = init_params<float>(cfg, 9);
  const auto x = oracle::random_tensor(Shape4{1, 3, 16, 16}, rng).cast<float>();
  EXPECT_EQ(segment(cfg, params, x), segment(cfg, params, x));
}

TEST(Discriminator, FivelayersOn32Pixels) {
  std::mt19937_64 rng(7);
  const DiscriminatorConfig cfg;
  EXPECT_EQ(cfg.layers(), 5);
  const auto params = init_params<double>(cfg, 1);
  Tape<double> tape;
  const auto y = discriminator_forward(cfg, bind(tape, params, false),
                                       tape.constant(oracle::random_tensor(Shape4{1, 1, 32, 32}, rng, 0, 1)));
  EXPECT_EQ(y.shape(), (Shape4{1, 1, 32, 32}));
  // The last conv produces a 1x1 map, so the upsampled output is constant.
  for (double v : y.value().data()) EXPECT_EQ(v, y.value()[0]);
  EXPECT_TRUE(strictly_inside_unit(y.value()));
}

TEST(Discriminator, ZeroLastLayerGivesHalf) {
  std::mt19937_64 rng(8);
  const auto cfg = DiscriminatorConfig::toy(3);
  auto params = init_params<double>(cfg, 2);
  zero_param(params, "disc2.weight");
  const auto y = discriminate(cfg, params, oracle::random_tensor(Shape4{2, 1, 8, 8}, rng, 0, 1));
  for (double v : y.data()) EXPECT_EQ(v, 0.5);
}

TEST(Discriminator, RangeOverRandomParams) {
  std::mt19937_64 rng(9);
  for (int t = 0; t < 20; ++t) {
    const auto cfg = DiscriminatorConfig::toy(3 + t % 3);
    const auto params = init_params<double>(cfg, static_cast<std::uint64_t>(t));
    const auto y = discriminate(cfg, params, oracle::random_tensor(Shape4{1, 1, 32, 32}, rng, 0, 1));
    EXPECT_EQ(y.shape(), (Shape4{1, 1, 32, 32}));
    EXPECT_TRUE(strictly_inside_unit(y));
  }
}

TEST(Discriminator, TooSmallInputIsRejected) {
  const DiscriminatorConfig cfg;
  const auto params = init_params<double>(cfg, 1);
  EXPECT_THROW((void)discriminate(cfg, params, Tensor4<double>(Shape4{1, 1, 16, 16})), Error);
}

TEST(Discriminator, ToyScheduleFitsInput) {
  EXPECT_EQ(DiscriminatorConfig::for_input(32).layers(), 5);
  EXPECT_EQ(DiscriminatorConfig::for_input(16).layers(), 4);
  EXPECT_EQ(DiscriminatorConfig::for_input(8).layers(), 3);
  EXPECT_THROW(DiscriminatorConfig::for_input(4), Error);
  EXPECT_EQ(DiscriminatorConfig::toy(3).channels, (std::vector<int>{8, 16, 1}));
  EXPECT_THROW(DiscriminatorConfig::toy(6), Error);
}

TEST(Init, SameSeedSameParamsDifferentSeedDifferent) {
  const SegmenterConfig cfg;
  EXPECT_EQ(init_params<float>(cfg, 3), init_params<float>(cfg, 3));
  EXPECT_NE(init_params<float>(cfg, 3), init_params<float>(cfg, 4));
}

TEST(Init, BiasesZeroAndKaimingSpread) {
  SegmenterConfig cfg;
  cfg.base_channels = 32;
  cfg.depth = 2;
  const auto p = init_params<double>(cfg, 11);
  int checked = 0;
  for (const auto& item : p.items) {
    const auto& v = item.value;
    if (item.name.ends_with(".bias")) {
      for (double b : v.data()) EXPECT_EQ(b, 0.0);
      continue;
    }
    if (v.numel() < 10000) continue;
    const Shape4 s = v.shape();
    // A 2x2 stride-2 transposed conv feeds each output pixel one tap per input channel.
    const int fan_in = item.name.find(".up.") != std::string::npos ? s.n : s.c * s.h * s.w;
    double mean = 0;
    for (double x : v.data()) mean += x;
    mean /= static_cast<double>(v.numel());
    double var = 0;
    for (double x : v.data()) var += (x - mean) * (x - mean);
    const double sd = std::sqrt(var / static_cast<double>(v.numel() - 1));
    const double target = kaiming_std(fan_in, 0.2);
    EXPECT_NEAR(sd / target, 1.0, 0.2) << item.name;
    ++checked;
  }
  EXPECT_GE(checked, 3);
}

TEST(Bind, FrozenParamsGetNoGradient) {
  std::mt19937_64 rng(12);
  const auto cfg = DiscriminatorConfig::toy(3);
  const auto params = init_params<double>(cfg, 1);
  Tape<double> tape;
  const auto frozen = bind(tape, params, false);
  auto x = tape.parameter(oracle::random_tensor(Shape4{1, 1, 8, 8}, rng, 0, 1));
  tape.backward(sum(discriminator_forward(cfg, frozen, x)));
  for (const auto& v : frozen) EXPECT_EQ(tape.grad(v), Tensor4<double>(v.shape()));
  double norm = 0;
  for (double g : tape.grad(x).data()) norm += std::abs(g);
  EXPECT_GT(norm, 0.0);
}

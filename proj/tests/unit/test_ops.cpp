#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <numeric>
#include <random>
#include <vector>

#include "oracles.hpp"
#include "semipso/error.hpp"
#include "semipso/ops.hpp"

using namespace semipso;

namespace {

using Builder = std::function<Var<double>(Tape<double>&, const std::vector<Var<double>>&)>;

// Loss = <op(inputs), w> for a fixed random w; returns the worst relative
// error over every input coordinate.
oracle::FdResult fd_check(const Builder& op, const std::vector<Tensor4<double>>& inputs,
                          std::mt19937_64& rng) {
  Tensor4<double> w;
  const auto forward = [&](const std::vector<Tensor4<double>>& xs, std::vector<Tensor4<double>>* grads) {
    Tape<double> tape;
    std::vector<Var<double>> vars;
    for (const auto& x : xs) vars.push_back(tape.parameter(x));
    const Var<double> out = op(tape, vars);
    if (w.empty()) w = oracle::random_tensor(out.shape(), rng);
    const Var<double> loss = weighted_sum(out, w);
    if (grads != nullptr) {
      tape.backward(loss);
      for (const auto& v : vars) grads->push_back(tape.grad(v));
    }
    return loss.value()[0];
  };
  std::vector<Tensor4<double>> grads;
  forward(inputs, &grads);

  std::vector<double> flat;
  std::vector<double> gflat;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    flat.insert(flat.end(), inputs[i].vec().begin(), inputs[i].vec().end());
    gflat.insert(gflat.end(), grads[i].vec().begin(), grads[i].vec().end());
  }
  const auto f = [&](const std::vector<double>& v) {
    std::vector<Tensor4<double>> xs;
    std::size_t off = 0;
    for (const auto& in : inputs) {
      std::vector<double> part(v.begin() + static_cast<long>(off),
                               v.begin() + static_cast<long>(off + in.numel()));
      off += in.numel();
      xs.emplace_back(in.shape(), std::move(part));
    }
    return forward(xs, nullptr);
  };
  std::vector<std::size_t> coords(flat.size());
  std::iota(coords.begin(), coords.end(), 0);
  return oracle::check_gradient(f, flat, gflat, coords);
}

int rand_int(std::mt19937_64& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

void expect_fd_ok(const oracle::FdResult& r) {
  EXPECT_LT(r.max_rel_error, 1e-6);
  EXPECT_LE(r.skipped * 50, r.checked + r.skipped);
}

}  // namespace

TEST(Conv2d, MatchesDirectSummation) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 200; ++trial) {
    const int stride = rand_int(rng, 1, 2);
    const int pad = rand_int(rng, 0, 2);
    const int kh = rand_int(rng, 1, 4);
    const int h = rand_int(rng, std::max(1, kh - 2 * pad), 9);
    const Shape4 xs{rand_int(rng, 1, 2), rand_int(rng, 1, 3), h, h};
    const Shape4 ks{rand_int(rng, 1, 3), xs.c, kh, kh};
    const auto x = oracle::random_tensor(xs, rng);
    const auto k = oracle::random_tensor(ks, rng);
    const auto y = conv2d_forward(x, k, ConvGeometry{stride, pad});
    const auto ref = oracle::conv2d(x, k, stride, pad);
    ASSERT_EQ(y.shape(), ref.shape());
    for (std::size_t i = 0; i < y.numel(); ++i) EXPECT_NEAR(y[i], ref[i], 1e-12);
  }
}

TEST(Conv2d, OneByOneIdentityKernel) {
  std::mt19937_64 rng(2);
  const auto x = oracle::random_tensor(Shape4{2, 3, 5, 5}, rng);
  Tensor4<double> k(Shape4{3, 3, 1, 1});
  for (int c = 0; c < 3; ++c) k.at(c, c, 0, 0) = 1;
  EXPECT_EQ(conv2d_forward(x, k, ConvGeometry{}), x);
}

TEST(Conv2d, OutputSizes) {
  EXPECT_EQ(conv_output_size(32, 4, ConvGeometry{2, 1}), 16);
  EXPECT_EQ(conv_output_size(8, 3, ConvGeometry{1, 1}), 8);
  EXPECT_EQ(transposed_conv_output_size(4, 2, ConvGeometry{2, 0}), 8);
  EXPECT_THROW(conv_output_size(2, 5, ConvGeometry{1, 0}), Error);
}

TEST(Conv2d, ChannelMismatchThrows) {
  const Tensor4<double> x(Shape4{1, 2, 4, 4});
  const Tensor4<double> k(Shape4{1, 3, 3, 3});
  try {
    (void)conv2d_forward(x, k, ConvGeometry{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kShapeMismatch);
  }
}

TEST(TransposedConv2d, IsTheAdjointOfConv2d) {
  std::mt19937_64 rng(3);
  int done = 0;
  while (done < 200) {
    const int stride = rand_int(rng, 1, 3);
    const int pad = rand_int(rng, 0, 1);
    const int kh = rand_int(rng, 1, 4);
    const int oh = rand_int(rng, 1, 4);
    const int h = (oh - 1) * stride - 2 * pad + kh;
    if (h < 1 || kh <= pad) continue;
    ++done;
    const Shape4 xs{rand_int(rng, 1, 2), rand_int(rng, 1, 3), h, h};
    const Shape4 ks{rand_int(rng, 1, 3), xs.c, kh, kh};
    const ConvGeometry g{stride, pad};
    const auto x = oracle::random_tensor(xs, rng);
    const auto k = oracle::random_tensor(ks, rng);
    const auto cx = conv2d_forward(x, k, g);
    ASSERT_EQ(cx.shape().h, oh);
    const auto y = oracle::random_tensor(cx.shape(), rng);
    const auto ty = transposed_conv2d_forward(y, k, g);
    ASSERT_EQ(ty.shape(), xs);
    const double lhs = dot(cx, y);
    EXPECT_NEAR(lhs, dot(x, ty), 1e-10 * std::max(1.0, std::abs(lhs)));
  }
}

TEST(TransposedConv2d, Stride2Kernel2Upsamples) {
  // A single pixel spreads into a 2x2 block weighted by the kernel.
  const Tensor4<double> x(Shape4{1, 1, 1, 1}, 2.0);
  const Tensor4<double> k(Shape4{1, 1, 2, 2}, std::vector<double>{1, 2, 3, 4});
  const auto y = transposed_conv2d_forward(x, k, ConvGeometry{2, 0});
  EXPECT_EQ(y, Tensor4<double>(Shape4{1, 1, 2, 2}, std::vector<double>{2, 4, 6, 8}));
}

TEST(UpsampleBilinear, HalfPixelClosedForm) {
  const Tensor4<double> x(Shape4{1, 1, 1, 2}, std::vector<double>{0, 1});
  const auto y = upsample_bilinear_forward(x, 1, 4);
  EXPECT_EQ(y, Tensor4<double>(Shape4{1, 1, 1, 4}, std::vector<double>{0, 0.25, 0.75, 1}));
}

TEST(UpsampleBilinear, SameSizeIsIdentity) {
  std::mt19937_64 rng(4);
  const auto x = oracle::random_tensor(Shape4{1, 2, 3, 5}, rng);
  EXPECT_EQ(upsample_bilinear_forward(x, 3, 5), x);
}

TEST(UpsampleBilinear, ConstantStaysConstant) {
  const Tensor4<double> x(Shape4{1, 1, 2, 2}, 0.7);
  for (double v : upsample_bilinear_forward(x, 16, 16).data()) EXPECT_NEAR(v, 0.7, 1e-15);
}

TEST(UpsampleBilinear, DownscaleIsRejected) {
  const Tensor4<double> x(Shape4{1, 1, 4, 4});
  EXPECT_THROW((void)upsample_bilinear_forward(x, 2, 2), Error);
}

TEST(Sigmoid, StaysInsideOpenInterval) {
  Tape<double> tape;
  const Tensor4<double> x(Shape4{1, 1, 1, 3}, std::vector<double>{-1000, 0, 1000});
  const auto y = sigmoid(tape.constant(x));
  EXPECT_GT(y.value()[0], 0.0);
  EXPECT_EQ(y.value()[1], 0.5);
  EXPECT_LT(y.value()[2], 1.0);
}

TEST(MaxPool, PicksFirstOfTies) {
  Tape<double> tape;
  const Tensor4<double> x(Shape4{1, 1, 2, 2}, 1.0);
  auto p = tape.parameter(x);
  auto y = max_pool2x2(p);
  tape.backward(sum(y));
  EXPECT_EQ(tape.grad(p), Tensor4<double>(Shape4{1, 1, 2, 2}, std::vector<double>{1, 0, 0, 0}));
}

TEST(LinearCombination, LengthMismatchThrows) {
  Tape<double> tape;
  std::vector<Var<double>> terms{tape.constant(Tensor4<double>::scalar(1))};
  std::vector<double> coefs{1.0, 2.0};
  EXPECT_THROW((void)linear_combination<double>(terms, coefs), Error);
}

TEST(FiniteDifference, Conv2dInputAndKernel) {
  std::mt19937_64 rng(10);
  for (int trial = 0; trial < 100; ++trial) {
    const ConvGeometry g{rand_int(rng, 1, 2), rand_int(rng, 0, 1)};
    const int kh = rand_int(rng, 1, 3);
    const int h = rand_int(rng, kh, 6);
    const Shape4 xs{rand_int(rng, 1, 2), rand_int(rng, 1, 2), h, h};
    const Shape4 ks{rand_int(rng, 1, 2), xs.c, kh, kh};
    expect_fd_ok(fd_check([&](Tape<double>&, const std::vector<Var<double>>& v) {
                   return conv2d(v[0], v[1], g);
                 },
                 {oracle::random_tensor(xs, rng), oracle::random_tensor(ks, rng)}, rng));
  }
}

TEST(FiniteDifference, TransposedConv2dInputAndKernel) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    const ConvGeometry g{rand_int(rng, 1, 2), rand_int(rng, 0, 1)};
    const int kh = rand_int(rng, 2, 3);
    const Shape4 xs{1, rand_int(rng, 1, 2), rand_int(rng, 2, 4), rand_int(rng, 2, 4)};
    const Shape4 ks{xs.c, rand_int(rng, 1, 2), kh, kh};
    expect_fd_ok(fd_check([&](Tape<double>&, const std::vector<Var<double>>& v) {
                   return transposed_conv2d(v[0], v[1], g);
                 },
                 {oracle::random_tensor(xs, rng), oracle::random_tensor(ks, rng)}, rng));
  }
}

TEST(FiniteDifference, BiasUpsampleSigmoid) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 100; ++trial) {
    const Shape4 xs{rand_int(rng, 1, 2), rand_int(rng, 1, 3), rand_int(rng, 1, 4), rand_int(rng, 1, 4)};
    const int oh = xs.h * rand_int(rng, 1, 4);
    const int ow = xs.w + rand_int(rng, 0, 5);
    expect_fd_ok(fd_check([&](Tape<double>&, const std::vector<Var<double>>& v) {
                   return sigmoid(upsample_bilinear(add_bias(v[0], v[1]), oh, ow));
                 },
                 {oracle::random_tensor(xs, rng, -3, 3),
                  oracle::random_tensor(Shape4{1, xs.c, 1, 1}, rng)},
                 rng));
  }
}

TEST(FiniteDifference, LeakyReluPoolConcat) {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 100; ++trial) {
    const int h = 2 * rand_int(rng, 1, 3);
    const Shape4 as{rand_int(rng, 1, 2), rand_int(rng, 1, 2), h, h};
    const Shape4 bs{as.n, rand_int(rng, 1, 2), h, h};
    expect_fd_ok(fd_check([&](Tape<double>&, const std::vector<Var<double>>& v) {
                   return max_pool2x2(leaky_relu(concat_channels(v[0], v[1]), 0.2));
                 },
                 {oracle::random_tensor(as, rng), oracle::random_tensor(bs, rng)}, rng));
  }
}

TEST(FiniteDifference, SumAndLinearCombination) {
  std::mt19937_64 rng(14);
  for (int trial = 0; trial < 100; ++trial) {
    const Shape4 s{1, 1, rand_int(rng, 1, 3), rand_int(rng, 1, 3)};
    const double c0 = std::uniform_real_distribution<double>(-2, 2)(rng);
    const double c1 = std::uniform_real_distribution<double>(-2, 2)(rng);
    expect_fd_ok(fd_check([&](Tape<double>&, const std::vector<Var<double>>& v) {
                   std::vector<Var<double>> terms{sum(v[0]), sum(sigmoid(v[1]))};
                   std::vector<double> coefs{c0, c1};
                   return linear_combination<double>(terms, coefs);
                 },
                 {oracle::random_tensor(s, rng), oracle::random_tensor(s, rng)}, rng));
  }
}

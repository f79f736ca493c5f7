#include <gtest/gtest.h>

#include <vector>

#include "semipso/autodiff.hpp"
#include "semipso/error.hpp"
#include "semipso/ops.hpp"

using namespace semipso;

namespace {

Tensor4<double> vec3(double a, double b, double c) {
  return Tensor4<double>(Shape4{1, 1, 1, 3}, std::vector<double>{a, b, c});
}

}  // namespace

TEST(Tape, SumGradientIsOnes) {
  Tape<double> tape;
  auto x = tape.parameter(vec3(1, 2, 3));
  auto s = sum(x);
  EXPECT_EQ(s.value()[0], 6.0);
  tape.backward(s);
  EXPECT_EQ(tape.grad(x), Tensor4<double>::full(Shape4{1, 1, 1, 3}, 1.0));
}

TEST(Tape, ReusedNodeAccumulates) {
  Tape<double> tape;
  auto x = tape.parameter(vec3(1, 2, 3));
  std::vector<Var<double>> terms{sum(x), weighted_sum(x, vec3(2, 0, -1))};
  std::vector<double> coefs{1.0, 3.0};
  auto total = linear_combination<double>(terms, coefs);
  tape.backward(total);
  EXPECT_EQ(tape.grad(x), vec3(7, 1, -2));
}

TEST(Tape, ConstantsReceiveNoGradient) {
  Tape<double> tape;
  auto c = tape.constant(vec3(1, 2, 3));
  auto x = tape.parameter(vec3(0, 0, 0));
  auto y = weighted_sum(concat_channels(c, x), Tensor4<double>::full(Shape4{1, 2, 1, 3}, 1.0));
  EXPECT_FALSE(tape.requires_grad(c));
  EXPECT_TRUE(tape.requires_grad(y));
  tape.backward(y);
  EXPECT_EQ(tape.grad(c), Tensor4<double>::zeros(Shape4{1, 1, 1, 3}));
  EXPECT_EQ(tape.grad(x), Tensor4<double>::full(Shape4{1, 1, 1, 3}, 1.0));
}

TEST(Tape, DetachStopsGradient) {
  Tape<double> tape;
  auto x = tape.parameter(vec3(1, 2, 3));
  auto d = tape.detach(x);
  std::vector<Var<double>> terms{sum(x), sum(d)};
  std::vector<double> coefs{1.0, 1.0};
  auto total = linear_combination<double>(terms, coefs);
  tape.backward(total);
  EXPECT_EQ(tape.grad(x), Tensor4<double>::full(Shape4{1, 1, 1, 3}, 1.0));
  EXPECT_EQ(tape.grad(d), Tensor4<double>::zeros(Shape4{1, 1, 1, 3}));
}

TEST(Tape, NonScalarRootIsRejected) {
  Tape<double> tape;
  auto x = tape.parameter(vec3(1, 2, 3));
  try {
    tape.backward(x);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNonScalarRoot);
  }
}

TEST(Tape, BackwardTwiceGivesSameGradient) {
  Tape<double> tape;
  auto x = tape.parameter(vec3(1, -2, 3));
  auto y = sum(leaky_relu(x, 0.2));
  tape.backward(y);
  const auto g1 = tape.grad(x);
  tape.backward(y);
  EXPECT_EQ(tape.grad(x), g1);
  EXPECT_EQ(g1, vec3(1, 0.2, 1));
}

TEST(Tape, UnreachedNodeHasZeroGradient) {
  Tape<double> tape;
  auto x = tape.parameter(vec3(1, 2, 3));
  auto unused = tape.parameter(vec3(4, 5, 6));
  tape.backward(sum(x));
  EXPECT_EQ(tape.grad(unused), Tensor4<double>::zeros(Shape4{1, 1, 1, 3}));
}

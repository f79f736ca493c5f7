#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "semipso/error.hpp"
#include "semipso/tensor.hpp"

using namespace semipso;

TEST(Tensor, ConstructsZeroFilledWithShape) {
  Tensor4<float> t(Shape4{2, 3, 4, 5});
  EXPECT_EQ(t.numel(), 120u);
  for (float v : t.data()) EXPECT_EQ(v, 0.0f);
  EXPECT_EQ(t.shape().str(), "[2,3,4,5]");
}

TEST(Tensor, RowMajorOffsets) {
  std::vector<double> v(2 * 3 * 4 * 5);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<double>(i);
  Tensor4<double> t(Shape4{2, 3, 4, 5}, v);
  EXPECT_EQ(t.at(1, 2, 3, 4), 119.0);
  EXPECT_EQ(t.at(0, 1, 0, 0), 20.0);
  EXPECT_EQ(t.at(1, 0, 0, 1), 61.0);
}

TEST(Tensor, DataSizeMismatchThrows) {
  try {
    Tensor4<double> t(Shape4{1, 1, 2, 2}, std::vector<double>(3));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kShapeMismatch);
  }
}

TEST(Tensor, StackAndItemAreInverse) {
  Tensor4<double> a(Shape4{1, 2, 2, 2}, 1.0);
  Tensor4<double> b(Shape4{1, 2, 2, 2}, 2.0);
  std::vector<Tensor4<double>> items{a, b};
  const auto s = stack_batch<double>(items);
  EXPECT_EQ(s.shape(), (Shape4{2, 2, 2, 2}));
  EXPECT_EQ(s.item(0), a);
  EXPECT_EQ(s.item(1), b);
}

TEST(Tensor, StackRejectsMixedShapes) {
  std::vector<Tensor4<double>> items{Tensor4<double>(Shape4{1, 1, 2, 2}),
                                     Tensor4<double>(Shape4{1, 1, 3, 2})};
  EXPECT_THROW(stack_batch<double>(items), Error);
}

TEST(Tensor, ReshapeKeepsData) {
  Tensor4<float> t(Shape4{1, 2, 3, 4}, 1.5f);
  const auto r = t.reshaped(Shape4{4, 3, 2, 1});
  EXPECT_EQ(r.vec(), t.vec());
  EXPECT_THROW((void)t.reshaped(Shape4{1, 1, 1, 5}), Error);
}

TEST(Tensor, SumDotAndFiniteness) {
  Tensor4<double> a(Shape4{1, 1, 1, 3}, std::vector<double>{1, 2, 3});
  Tensor4<double> b(Shape4{1, 1, 1, 3}, std::vector<double>{4, 5, 6});
  EXPECT_EQ(a.sum(), 6.0);
  EXPECT_EQ(dot(a, b), 32.0);
  EXPECT_TRUE(a.all_finite());
  a[1] = std::numeric_limits<double>::quiet_NaN();
  EXPECT_FALSE(a.all_finite());
}

TEST(Tensor, CastRoundsToFloat) {
  Tensor4<double> a(Shape4{1, 1, 1, 1}, 0.1);
  const auto f = a.cast<float>();
  EXPECT_EQ(f[0], 0.1f);
}

#include <gtest/gtest.h>

#include <filesystem>
#include <random>
#include <string>

#include "oracles.hpp"
#include "semipso/error.hpp"
#include "semipso/image_io.hpp"

using namespace semipso;

namespace {

ErrorCode decode_error(const std::string& bytes) {
  try {
    (void)decode_pnm<double>(bytes);
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "decode succeeded";
  return ErrorCode::kInvalidArgument;
}

}  // namespace

TEST(Pnm, RoundTripIsExactAfterQuantisation) {
  std::mt19937_64 rng(1);
  for (int t = 0; t < 200; ++t) {
    const int c = t % 2 == 0 ? 3 : 1;
    const Shape4 s{1, c, 1 + t % 7, 1 + t % 11};
    const auto img = quantize8(oracle::random_tensor(s, rng, 0, 1));
    EXPECT_EQ(decode_pnm<double>(encode_pnm(img)), img);
  }
}

TEST(Pnm, FileRoundTrip) {
  std::mt19937_64 rng(2);
  const auto dir = std::filesystem::temp_directory_path() / "semipso_test_image_io";
  std::filesystem::create_directories(dir);
  const auto rgb = quantize8(oracle::random_tensor(Shape4{1, 3, 5, 4}, rng, 0, 1)).cast<float>();
  save_image(dir / "a.ppm", rgb);
  EXPECT_EQ(load_image<float>(dir / "a.ppm"), rgb);
  std::filesystem::remove_all(dir);
}

TEST(Pnm, GrayLevelsMapLinearly) {
  const std::string bytes = std::string("P5\n2 1\n255\n") + static_cast<char>(128) + static_cast<char>(255);
  const auto t = decode_pnm<double>(bytes);
  EXPECT_EQ(t.shape(), (Shape4{1, 1, 1, 2}));
  EXPECT_NEAR(t[0], 0.50196, 1e-5);
  EXPECT_EQ(t[0], 128.0 / 255.0);
  EXPECT_EQ(t[1], 1.0);
}

TEST(Pnm, BinaryMaskMapsToZeroOne) {
  const std::string bytes = std::string("P5\n3 1\n255\n") + '\0' + static_cast<char>(255) + '\0';
  const auto t = decode_pnm<double>(bytes);
  EXPECT_EQ(t, Tensor4<double>(Shape4{1, 1, 1, 3}, std::vector<double>{0, 1, 0}));
}

TEST(Pnm, PpmIsPlanarInMemory) {
  const std::string bytes = std::string("P6\n2 1\n255\n") + static_cast<char>(255) + '\0' + '\0' +
                            '\0' + '\0' + static_cast<char>(255);
  const auto t = decode_pnm<double>(bytes);
  EXPECT_EQ(t.at(0, 0, 0, 0), 1.0);
  EXPECT_EQ(t.at(0, 2, 0, 0), 0.0);
  EXPECT_EQ(t.at(0, 2, 0, 1), 1.0);
}

TEST(Pnm, HeaderCommentsAndSmallMaxval) {
  const std::string bytes = std::string("P5\n# made by hand\n2 1 # size\n3\n") + '\x01' + '\x03';
  const auto t = decode_pnm<double>(bytes);
  EXPECT_EQ(t[0], 1.0 / 3.0);
  EXPECT_EQ(t[1], 1.0);
}

TEST(Pnm, DistinctErrors) {
  EXPECT_EQ(decode_error("P3\n1 1\n255\n0 0 0"), ErrorCode::kBadMagic);
  EXPECT_EQ(decode_error("GIF89a"), ErrorCode::kBadMagic);
  EXPECT_EQ(decode_error("P5\n1 x\n255\n\x01"), ErrorCode::kMalformedHeader);
  EXPECT_EQ(decode_error("P5\n1 1\n70000\n\x01"), ErrorCode::kMalformedHeader);
  EXPECT_EQ(decode_error("P5\n0 1\n255\n"), ErrorCode::kMalformedHeader);
  EXPECT_EQ(decode_error("P5\n2 2\n255\n\x01\x02"), ErrorCode::kTruncatedPayload);
  EXPECT_EQ(decode_error("P6\n1 1\n255\n\x01\x02"), ErrorCode::kTruncatedPayload);
}

TEST(Pnm, EncodeRejectsBadChannelCount) {
  EXPECT_THROW((void)encode_pnm(Tensor4<double>(Shape4{1, 2, 2, 2})), Error);
}

TEST(Pnm, MissingFileIsIoFailure) {
  try {
    (void)load_image<double>("/nonexistent/semipso.ppm");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kIoFailure);
  }
}

TEST(Quantize8, RoundsToNearestLevelAndClamps) {
  const Tensor4<double> t(Shape4{1, 1, 1, 4}, std::vector<double>{-0.5, 0.5, 1.7, 0.001});
  const auto q = quantize8(t);
  EXPECT_EQ(q[0], 0.0);
  EXPECT_EQ(q[1], 128.0 / 255.0);
  EXPECT_EQ(q[2], 1.0);
  EXPECT_EQ(q[3], 0.0);
}

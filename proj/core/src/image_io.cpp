#include "semipso/image_io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>

#include "semipso/error.hpp"

namespace semipso {
namespace {

class HeaderParser {
 public:
  HeaderParser(std::string_view bytes, const std::string& origin) : b_(bytes), origin_(origin) {}

  char magic() {
    require(b_.size() >= 2 && b_[0] == 'P' && (b_[1] == '5' || b_[1] == '6'), ErrorCode::kBadMagic,
            origin_ + ": not a binary PGM/PPM file (expected P5 or P6)");
    pos_ = 2;
    return b_[1];
  }

  int number() {
    skip_space_and_comments();
    require(pos_ < b_.size() && std::isdigit(static_cast<unsigned char>(b_[pos_])),
            ErrorCode::kMalformedHeader, origin_ + ": malformed header");
    long v = 0;
    while (pos_ < b_.size() && std::isdigit(static_cast<unsigned char>(b_[pos_]))) {
      v = v * 10 + (b_[pos_++] - '0');
      require(v <= 1'000'000, ErrorCode::kMalformedHeader, origin_ + ": header value too large");
    }
    return static_cast<int>(v);
  }

  // Exactly one whitespace byte separates the header from the raster.
  std::size_t payload_start() {
    require(pos_ < b_.size() && std::isspace(static_cast<unsigned char>(b_[pos_])),
            ErrorCode::kMalformedHeader, origin_ + ": malformed header");
    return pos_ + 1;
  }

 private:
  void skip_space_and_comments() {
    while (pos_ < b_.size()) {
      if (std::isspace(static_cast<unsigned char>(b_[pos_]))) {
        ++pos_;
      } else if (b_[pos_] == '#') {
        while (pos_ < b_.size() && b_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  std::string_view b_;
  const std::string& origin_;
  std::size_t pos_ = 0;
};

template <Real T>
unsigned char to_level(T v) {
  const double c = std::clamp(static_cast<double>(v), 0.0, 1.0);
  return static_cast<unsigned char>(std::lround(c * 255.0));
}

}  // namespace

template <Real T>
Tensor4<T> decode_pnm(std::string_view bytes, const std::string& origin) {
  HeaderParser p(bytes, origin);
  const int channels = p.magic() == '6' ? 3 : 1;
  const int width = p.number();
  const int height = p.number();
  const int maxval = p.number();
  require(width >= 1 && height >= 1, ErrorCode::kMalformedHeader,
          origin + ": image dimensions must be positive");
  require(maxval >= 1 && maxval <= 255, ErrorCode::kMalformedHeader,
          origin + ": only 8-bit images (maxval 1..255) are supported, got " +
              std::to_string(maxval));
  const std::size_t start = p.payload_start();
  const std::size_t pixels = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  const std::size_t need = pixels * static_cast<std::size_t>(channels);
  require(bytes.size() >= start && bytes.size() - start >= need, ErrorCode::kTruncatedPayload,
          origin + ": raster truncated (" + std::to_string(bytes.size() - std::min(start, bytes.size())) +
              " of " + std::to_string(need) + " bytes)");

  Tensor4<T> out(Shape4{1, channels, height, width});
  const auto* raster = reinterpret_cast<const unsigned char*>(bytes.data() + start);
  for (std::size_t i = 0; i < pixels; ++i) {
    for (int c = 0; c < channels; ++c) {
      // Interleaved RGB on disk, planar in memory.
      out[static_cast<std::size_t>(c) * pixels + i] =
          static_cast<T>(raster[i * static_cast<std::size_t>(channels) + static_cast<std::size_t>(c)]) /
          static_cast<T>(maxval);
    }
  }
  return out;
}

template <Real T>
std::string encode_pnm(const Tensor4<T>& image) {
  const Shape4& s = image.shape();
  require(s.n == 1 && (s.c == 1 || s.c == 3) && s.h >= 1 && s.w >= 1, ErrorCode::kInvalidArgument,
          "encode_pnm expects [1,1,h,w] or [1,3,h,w], got " + s.str());
  std::string out = (s.c == 3 ? "P6\n" : "P5\n") + std::to_string(s.w) + " " +
                    std::to_string(s.h) + "\n255\n";
  const std::size_t pixels = static_cast<std::size_t>(s.h) * static_cast<std::size_t>(s.w);
  for (std::size_t i = 0; i < pixels; ++i) {
    for (int c = 0; c < s.c; ++c) {
      out.push_back(static_cast<char>(to_level(image[static_cast<std::size_t>(c) * pixels + i])));
    }
  }
  return out;
}

template <Real T>
Tensor4<T> load_image(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), ErrorCode::kIoFailure, "cannot open " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_pnm<T>(bytes, path.string());
}

template <Real T>
void save_image(const std::filesystem::path& path, const Tensor4<T>& image) {
  const std::string bytes = encode_pnm(image);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(out.good(), ErrorCode::kIoFailure, "cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  require(out.good(), ErrorCode::kIoFailure, "short write to " + path.string());
}

template <Real T>
Tensor4<T> quantize8(const Tensor4<T>& image) {
  Tensor4<T> out = image;
  for (auto& v : out.data()) v = static_cast<T>(to_level(v)) / static_cast<T>(255);
  return out;
}

#define SEMIPSO_INSTANTIATE_IMAGE_IO(T)                                                  \
  template Tensor4<T> decode_pnm(std::string_view, const std::string&);                  \
  template std::string encode_pnm(const Tensor4<T>&);                                    \
  template Tensor4<T> load_image(const std::filesystem::path&);                          \
  template void save_image(const std::filesystem::path&, const Tensor4<T>&);             \
  template Tensor4<T> quantize8(const Tensor4<T>&);

SEMIPSO_INSTANTIATE_IMAGE_IO(float)
SEMIPSO_INSTANTIATE_IMAGE_IO(double)

}  // namespace semipso

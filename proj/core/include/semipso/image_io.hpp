#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "semipso/tensor.hpp"

namespace semipso {

// Binary netpbm: P6 (RGB) <-> [1,3,h,w], P5 (gray) <-> [1,1,h,w]. Samples map
// linearly between [0, maxval] and [0, 1]; writing always uses maxval 255 and
// rounds to the nearest level. Malformed input raises kBadMagic,
// kMalformedHeader or kTruncatedPayload.

template <Real T>
Tensor4<T> decode_pnm(std::string_view bytes, const std::string& origin = "<memory>");

template <Real T>
std::string encode_pnm(const Tensor4<T>& image);

template <Real T>
Tensor4<T> load_image(const std::filesystem::path& path);

template <Real T>
void save_image(const std::filesystem::path& path, const Tensor4<T>& image);

/// Rounds every value to the nearest of the 256 levels k/255 (clamped to [0,1]).
template <Real T>
Tensor4<T> quantize8(const Tensor4<T>& image);

}  // namespace semipso

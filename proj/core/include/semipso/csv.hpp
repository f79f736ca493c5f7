#pragma once

#include <array>
#include <charconv>
#include <string>

namespace semipso {

/// Shortest decimal text that parses back to exactly `v` ("inf", "-inf", "nan"
/// for non-finite values). Locale independent.
inline std::string format_real(double v) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

}  // namespace semipso

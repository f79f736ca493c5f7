#include "semipso/config.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <iterator>
#include <sstream>

#include "semipso/error.hpp"

namespace semipso {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

}  // namespace

std::string normalize_key(std::string_view key) {
  std::string out;
  for (char c : trim(key)) {
    out.push_back(c == '-' ? '_' : static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

KeyValues parse_key_values(std::string_view text, const std::string& origin) {
  KeyValues out;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    std::string_view body = trim(std::string_view(line).substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    require(eq != std::string_view::npos, ErrorCode::kInvalidConfig,
            origin + ":" + std::to_string(line_no) + ": expected 'key = value'");
    const std::string key = normalize_key(body.substr(0, eq));
    require(!key.empty(), ErrorCode::kInvalidConfig,
            origin + ":" + std::to_string(line_no) + ": empty key");
    out.emplace_back(key, std::string(trim(body.substr(eq + 1))));
  }
  return out;
}

KeyValues read_key_value_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::kIoFailure, "cannot open config file " + path.string());
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_key_values(text, path.string());
}

double parse_double(const std::string& key, const std::string& value) {
  double v = 0;
  const auto* end = value.data() + value.size();
  const auto res = std::from_chars(value.data(), end, v);
  require(res.ec == std::errc() && res.ptr == end, ErrorCode::kInvalidConfig,
          "'" + key + "' expects a number, got '" + value + "'");
  return v;
}

long parse_long(const std::string& key, const std::string& value) {
  long v = 0;
  const auto* end = value.data() + value.size();
  const auto res = std::from_chars(value.data(), end, v);
  require(res.ec == std::errc() && res.ptr == end, ErrorCode::kInvalidConfig,
          "'" + key + "' expects an integer, got '" + value + "'");
  return v;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "1" || value == "true" || value == "yes" || value == "on") return true;
  if (value == "0" || value == "false" || value == "no" || value == "off") return false;
  fail(ErrorCode::kInvalidConfig, "'" + key + "' expects a boolean, got '" + value + "'");
}

}  // namespace semipso

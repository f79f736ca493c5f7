#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace semipso {

using KeyValues = std::vector<std::pair<std::string, std::string>>;

/// Parses `key = value` lines; blank lines and `#` comments are skipped.
/// Keys are normalised to lower case with '-' replaced by '_'.
KeyValues parse_key_values(std::string_view text, const std::string& origin = "<config>");
KeyValues read_key_value_file(const std::filesystem::path& path);

std::string normalize_key(std::string_view key);

double parse_double(const std::string& key, const std::string& value);
long parse_long(const std::string& key, const std::string& value);
bool parse_bool(const std::string& key, const std::string& value);

}  // namespace semipso

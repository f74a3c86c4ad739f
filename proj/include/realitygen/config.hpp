#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>

namespace realitygen::config {

using KeyValues = std::map<std::string, std::string>;

/// INI-style text: `key = value` lines, `[section]` headers, `#` or `;`
/// comments. Keys before the first header land in section "".
struct Document {
  std::map<std::string, KeyValues> sections;

  const KeyValues* section(const std::string& name) const;
};

/// Throws Error{InvalidConfig, IoFailure}.
Document parse_file(const std::filesystem::path& path);
Document parse_text(const std::string& text);

// Typed lookups. Missing keys return the fallback; malformed values throw
// Error{InvalidConfig} naming the key.
std::string get_string(const KeyValues& kv, const std::string& key, const std::string& fallback);
double get_double(const KeyValues& kv, const std::string& key, double fallback);
std::optional<double> get_optional_double(const KeyValues& kv, const std::string& key);
long long get_int(const KeyValues& kv, const std::string& key, long long fallback);
std::uint64_t get_u64(const KeyValues& kv, const std::string& key, std::uint64_t fallback);
bool get_bool(const KeyValues& kv, const std::string& key, bool fallback);

}  // namespace realitygen::config

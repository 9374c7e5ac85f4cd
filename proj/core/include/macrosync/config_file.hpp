#pragma once

#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>

// Strict sectioned key = value configuration text. Unknown sections or keys
// are errors when applied to an experiment; the [provenance] section is
// informational and skipped on load.
namespace macrosync {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigText {
  // "section.key" -> raw value string, insertion order not preserved;
  // serialization sorts keys for deterministic output.
  std::map<std::string, std::string> entries;

  bool contains(const std::string& dotted) const {
    return entries.count(dotted) != 0;
  }
};

/// Parses "[section]\nkey = value" text. Lines starting with '#' or ';' are
/// comments. Throws ConfigError on malformed lines or duplicate keys.
ConfigText parse_config(const std::string& text);
ConfigText load_config_file(const std::filesystem::path& path);

/// Serializes entries grouped by section, sections and keys sorted.
std::string serialize_config(const ConfigText& cfg);

double parse_double(const std::string& key, const std::string& value);
int parse_int(const std::string& key, const std::string& value);

}  // namespace macrosync

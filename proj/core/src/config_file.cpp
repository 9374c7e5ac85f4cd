#include "macrosync/config_file.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

namespace macrosync {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

}  // namespace

ConfigText parse_config(const std::string& text) {
  ConfigText cfg;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    if (t.front() == '[') {
      if (t.back() != ']' || t.size() < 3) {
        throw ConfigError("config line " + std::to_string(lineno) +
                          ": malformed section header");
      }
      section = trim(t.substr(1, t.size() - 2));
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": expected key = value");
    }
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (key.empty()) {
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": empty key");
    }
    const std::string dotted = section.empty() ? key : section + "." + key;
    if (!cfg.entries.emplace(dotted, value).second) {
      throw ConfigError("config: duplicate key " + dotted);
    }
  }
  return cfg;
}

ConfigText load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ConfigError("config: cannot open " + path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string serialize_config(const ConfigText& cfg) {
  // std::map iteration is already sorted; emit section headers on change.
  std::string out;
  std::string current_section;
  bool first = true;
  for (const auto& [dotted, value] : cfg.entries) {
    const auto dot = dotted.find('.');
    const std::string section =
        dot == std::string::npos ? "" : dotted.substr(0, dot);
    const std::string key =
        dot == std::string::npos ? dotted : dotted.substr(dot + 1);
    if (section != current_section || first) {
      if (!first) out += '\n';
      out += "[" + section + "]\n";
      current_section = section;
      first = false;
    }
    out += key + " = " + value + "\n";
  }
  return out;
}

double parse_double(const std::string& key, const std::string& value) {
  char* end = nullptr;
  const double v = std::strtod(value.c_str(), &end);
  if (end == value.c_str() || *end != '\0') {
    throw ConfigError("config: key " + key + " expects a number, got '" +
                      value + "'");
  }
  return v;
}

int parse_int(const std::string& key, const std::string& value) {
  char* end = nullptr;
  const long v = std::strtol(value.c_str(), &end, 10);
  if (end == value.c_str() || *end != '\0') {
    throw ConfigError("config: key " + key + " expects an integer, got '" +
                      value + "'");
  }
  return static_cast<int>(v);
}

}  // namespace macrosync

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "seqtag/common.hpp"

namespace seqtag::cli {

enum class KeyType { String, Path, Int, UInt64, Double, Bool, Enum };

struct KeySpec {
  KeyType type = KeyType::String;
  bool required = false;
  std::optional<std::string> default_value;
  std::vector<std::string> choices;  // Enum only
};

// Known keys for one command; unknown keys are rejected by name.
using KeyRegistry = std::map<std::string, KeySpec>;

const std::vector<std::string>& known_commands();
const KeyRegistry& registry_for(const std::string& command);

// Resolved settings for one command run. File values are overridden by
// CLI values; defaults fill the rest; types are checked against the
// registry and Path values are made absolute.
class RunConfig {
 public:
  RunConfig(std::string command, std::map<std::string, std::string> values);

  const std::string& command() const { return command_; }
  const std::map<std::string, std::string>& values() const { return values_; }

  bool has(const std::string& key) const;
  std::string get_string(const std::string& key) const;
  std::optional<std::string> get_optional(const std::string& key) const;
  int get_int(const std::string& key) const;
  std::uint64_t get_uint64(const std::string& key) const;
  double get_double(const std::string& key) const;
  bool get_bool(const std::string& key) const;

 private:
  std::string command_;
  std::map<std::string, std::string> values_;
};

// Parses the line-oriented "key = value" file with [command] sections.
// Top-level keys apply to the executing command. Returns raw values for
// `command` (sections for other commands are ignored).
std::map<std::string, std::string> parse_config_file(const std::string& path,
                                                     const std::string& command);

// File values, then overrides, then defaults; validates against the
// registry (unknown key, type mismatch, missing required key).
RunConfig load_config(const std::string& command, const std::optional<std::string>& path,
                      const std::vector<std::pair<std::string, std::string>>& cli_overrides);

}  // namespace seqtag::cli

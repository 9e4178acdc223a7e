#pragma once

// Flat `key = value` documents with [sections]. Values keep their source position so
// that unknown keys and bad units are reported at the offending line and column.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "zeno/types.hpp"

namespace zeno {

struct ConfigEntry {
  std::string value;
  std::string source;  // file name, "preset:<name>" or "override"
  int line = 0;
  int column = 0;      // of the value
  int key_column = 0;
};

class ConfigDocument {
 public:
  /// Throws ConfigError on malformed lines or duplicate keys.
  static ConfigDocument parse(const std::string& text, const std::string& source = "<config>");
  static ConfigDocument load(const std::string& path);

  /// `section.key=value`.
  void apply_override(const std::string& assignment);
  /// Entries of `other` replace entries with the same key.
  void merge(const ConfigDocument& other);

  bool has(const std::string& key) const { return entries_.count(key) > 0; }
  const ConfigEntry& at(const std::string& key) const;
  void erase(const std::string& key) { entries_.erase(key); }
  const std::map<std::string, ConfigEntry>& entries() const { return entries_; }

 private:
  std::map<std::string, ConfigEntry> entries_;  // "section.key"
};

/// Error positioned at an entry.
ConfigError entry_error(const ConfigEntry& e, const std::string& what);

/// Physical quantities with mandatory units. Frequencies come back as angular rad/s
/// (Hz, kHz, MHz), times in seconds (s, ms, us), rates in 1/s (`/s`).
double parse_frequency(const ConfigEntry& e);
double parse_time(const ConfigEntry& e);
double parse_rate(const ConfigEntry& e);
double parse_number(const ConfigEntry& e);
long parse_integer(const ConfigEntry& e);
bool parse_bool(const ConfigEntry& e);
/// Comma-separated list; empty items are rejected.
std::vector<std::string> split_list(const ConfigEntry& e);
std::vector<double> parse_frequency_list(const ConfigEntry& e);

}  // namespace zeno

#include "zeno/config.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

namespace zeno {

namespace {

std::string trim(const std::string& s, std::size_t* lead = nullptr) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) {
    if (lead) *lead = s.size();
    return {};
  }
  const auto b = s.find_last_not_of(" \t\r");
  if (lead) *lead = a;
  return s.substr(a, b - a + 1);
}

bool valid_name(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_')) return false;
  return true;
}

// Strip a trailing comment that starts with '#' or ';' outside the value text.
std::string strip_comment(const std::string& line) {
  for (std::size_t i = 0; i < line.size(); ++i)
    if ((line[i] == '#' || line[i] == ';') && (i == 0 || line[i - 1] == ' ' || line[i - 1] == '\t'))
      return line.substr(0, i);
  return line;
}

// Number followed by an optional unit token.
std::pair<double, std::string> split_quantity(const ConfigEntry& e) {
  const std::string& v = e.value;
  std::size_t used = 0;
  double x = 0.0;
  try {
    x = std::stod(v, &used);
  } catch (const std::exception&) {
    throw entry_error(e, "expected a number, got '" + v + "'");
  }
  if (!std::isfinite(x)) throw entry_error(e, "value must be finite");
  return {x, trim(v.substr(used))};
}

}  // namespace

ConfigError entry_error(const ConfigEntry& e, const std::string& what) {
  const std::string where = e.source.empty() || e.source == "<config>" ? "" : e.source + ": ";
  return ConfigError(where + what, e.line, e.column);
}

ConfigDocument ConfigDocument::parse(const std::string& text, const std::string& source) {
  ConfigDocument doc;
  std::istringstream is(text);
  std::string raw;
  std::string section;
  int lineno = 0;
  auto fail = [&](const std::string& what, std::size_t col) {
    const std::string where = source == "<config>" ? "" : source + ": ";
    return ConfigError(where + what, lineno, static_cast<int>(col) + 1);
  };
  while (std::getline(is, raw)) {
    ++lineno;
    const std::string line = strip_comment(raw);
    std::size_t lead = 0;
    const std::string body = trim(line, &lead);
    if (body.empty()) continue;
    if (body.front() == '[') {
      if (body.back() != ']') throw fail("unterminated section header", lead);
      section = trim(body.substr(1, body.size() - 2));
      if (!valid_name(section)) throw fail("invalid section name '" + section + "'", lead + 1);
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw fail("expected 'key = value'", lead);
    const std::string key = trim(line.substr(0, eq));
    if (!valid_name(key)) throw fail("invalid key '" + key + "'", lead);
    if (section.empty()) throw fail("key '" + key + "' outside any [section]", lead);
    std::size_t vlead = 0;
    const std::string value = trim(line.substr(eq + 1), &vlead);
    if (value.empty()) throw fail("empty value for '" + key + "'", eq + 1);
    const std::string full = section + "." + key;
    if (doc.entries_.count(full)) throw fail("duplicate key '" + full + "'", lead);
    doc.entries_[full] = ConfigEntry{value, source, lineno, static_cast<int>(eq + 1 + vlead) + 1,
                                     static_cast<int>(lead) + 1};
  }
  return doc;
}

ConfigDocument ConfigDocument::load(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse(ss.str(), path);
}

void ConfigDocument::apply_override(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError("override '" + assignment + "' is not 'section.key=value'");
  const std::string key = trim(assignment.substr(0, eq));
  const std::string value = trim(assignment.substr(eq + 1));
  const auto dot = key.find('.');
  if (dot == std::string::npos || !valid_name(key.substr(0, dot)) || !valid_name(key.substr(dot + 1)))
    throw ConfigError("override key '" + key + "' is not 'section.key'");
  if (value.empty()) throw ConfigError("override '" + key + "' has an empty value");
  entries_[key] = ConfigEntry{value, "override " + key, 0, 0, 0};
}

void ConfigDocument::merge(const ConfigDocument& other) {
  for (const auto& [k, v] : other.entries_) entries_[k] = v;
}

const ConfigEntry& ConfigDocument::at(const std::string& key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) throw ConfigError("missing required key '" + key + "'");
  return it->second;
}

double parse_frequency(const ConfigEntry& e) {
  const auto [x, unit] = split_quantity(e);
  if (unit == "Hz") return kTwoPi * x;
  if (unit == "kHz") return kTwoPi * 1e3 * x;
  if (unit == "MHz") return kTwoPi * 1e6 * x;
  if (unit.empty()) throw entry_error(e, "frequency needs a unit (Hz, kHz, MHz)");
  throw entry_error(e, "unknown frequency unit '" + unit + "'");
}

double parse_time(const ConfigEntry& e) {
  const auto [x, unit] = split_quantity(e);
  if (unit == "s") return x;
  if (unit == "ms") return 1e-3 * x;
  if (unit == "us") return 1e-6 * x;
  if (unit.empty()) throw entry_error(e, "time needs a unit (s, ms, us)");
  throw entry_error(e, "unknown time unit '" + unit + "'");
}

double parse_rate(const ConfigEntry& e) {
  const auto [x, unit] = split_quantity(e);
  if (unit == "/s" || unit == "1/s") return x;
  if (unit.empty()) throw entry_error(e, "rate needs a unit (/s)");
  throw entry_error(e, "unknown rate unit '" + unit + "'");
}

double parse_number(const ConfigEntry& e) {
  const auto [x, unit] = split_quantity(e);
  if (!unit.empty()) throw entry_error(e, "dimensionless value takes no unit, got '" + unit + "'");
  return x;
}

long parse_integer(const ConfigEntry& e) {
  std::size_t used = 0;
  long x = 0;
  try {
    x = std::stol(e.value, &used);
  } catch (const std::exception&) {
    throw entry_error(e, "expected an integer, got '" + e.value + "'");
  }
  if (used != e.value.size()) throw entry_error(e, "expected an integer, got '" + e.value + "'");
  return x;
}

bool parse_bool(const ConfigEntry& e) {
  if (e.value == "true" || e.value == "yes" || e.value == "on" || e.value == "1") return true;
  if (e.value == "false" || e.value == "no" || e.value == "off" || e.value == "0") return false;
  throw entry_error(e, "expected true or false, got '" + e.value + "'");
}

std::vector<std::string> split_list(const ConfigEntry& e) {
  std::vector<std::string> out;
  std::stringstream ss(e.value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) throw entry_error(e, "empty list item");
    out.push_back(item);
  }
  return out;
}

std::vector<double> parse_frequency_list(const ConfigEntry& e) {
  std::vector<double> out;
  for (const auto& item : split_list(e)) {
    ConfigEntry sub = e;
    sub.value = item;
    // a bare 0 needs no unit
    const auto [x, unit] = split_quantity(sub);
    out.push_back(x == 0.0 && unit.empty() ? 0.0 : parse_frequency(sub));
  }
  return out;
}

}  // namespace zeno

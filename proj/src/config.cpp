#include "ifesim/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

namespace ifesim {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

bool parse_number(const std::string& text, double& out) {
  const std::string t = trim(text);
  if (t.empty()) return false;
  const char* b = t.data();
  const char* e = b + t.size();
  const auto [p, ec] = std::from_chars(b, e, out);
  return ec == std::errc() && p == e;
}

}  // namespace

void ConfigSection::set(const std::string& key, std::string value, int line) {
  if (has(key)) {
    std::ostringstream os;
    os << source_ << ":" << line << ": duplicate key '" << key << "' (first set on line " << entries_.at(key).line << ")";
    throw ConfigError(os.str());
  }
  entries_[key] = ConfigEntry{std::move(value), line};
}

void ConfigSection::fail(const std::string& key, const std::string& message) const {
  std::ostringstream os;
  const auto it = entries_.find(key);
  os << source_ << ":" << (it != entries_.end() ? it->second.line : line_) << ": ";
  if (!name_.empty()) os << "[" << name_ << "] ";
  os << key << ": " << message;
  if (it != entries_.end()) os << " (got '" << it->second.value << "')";
  throw ConfigError(os.str());
}

std::string ConfigSection::get_string(const std::string& key, const std::string& fallback) const {
  const auto it = entries_.find(key);
  return it == entries_.end() ? fallback : it->second.value;
}

double ConfigSection::get_double(const std::string& key, double fallback) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  double v = 0;
  if (!parse_number(it->second.value, v)) fail(key, "expected a number");
  return v;
}

int ConfigSection::get_int(const std::string& key, int fallback) const {
  const double v = get_double(key, fallback);
  if (v != static_cast<double>(static_cast<int>(v))) fail(key, "expected an integer");
  return static_cast<int>(v);
}

bool ConfigSection::get_bool(const std::string& key, bool fallback) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  const std::string v = lower(it->second.value);
  if (v == "on" || v == "true" || v == "yes" || v == "1") return true;
  if (v == "off" || v == "false" || v == "no" || v == "0") return false;
  fail(key, "expected on/off");
}

std::vector<double> ConfigSection::get_list(const std::string& key, const std::vector<double>& fallback) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  std::vector<double> out;
  std::stringstream ss(it->second.value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    double v = 0;
    if (!parse_number(item, v)) fail(key, "expected a comma-separated list of numbers");
    out.push_back(v);
  }
  if (out.empty()) fail(key, "empty list");
  return out;
}

void ConfigSection::require_known(const std::vector<std::string>& allowed) const {
  for (const auto& [k, e] : entries_)
    if (std::find(allowed.begin(), allowed.end(), k) == allowed.end()) fail(k, "unknown key");
}

Config parse_config(const std::string& text, const std::string& source) {
  Config cfg;
  cfg.source = source;
  cfg.global = ConfigSection(source, "", 0);
  ConfigSection* cur = &cfg.global;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  auto error = [&](const std::string& msg) {
    std::ostringstream os;
    os << source << ":" << line << ": " << msg << ": '" << trim(raw) << "'";
    throw ConfigError(os.str());
  };
  while (std::getline(in, raw)) {
    ++line;
    std::string s = raw;
    if (const auto h = s.find('#'); h != std::string::npos) s.erase(h);
    s = trim(s);
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') error("unterminated section header");
      const std::string name = trim(s.substr(1, s.size() - 2));
      if (name.empty()) error("empty section name");
      for (const auto& sec : cfg.sections)
        if (sec.name() == name) error("duplicate section");
      cfg.sections.emplace_back(source, name, line);
      cur = &cfg.sections.back();
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) error("expected key = value");
    const std::string key = trim(s.substr(0, eq));
    const std::string value = trim(s.substr(eq + 1));
    if (key.empty()) error("missing key");
    if (value.empty()) error("missing value");
    cur->set(key, value, line);
  }
  return cfg;
}

Config load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str(), path);
}

}  // namespace ifesim

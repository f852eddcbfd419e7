#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace ifesim {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigEntry {
  std::string value;
  int line = 0;
};

// One [section] of the config file.
class ConfigSection {
 public:
  ConfigSection() = default;
  ConfigSection(std::string source, std::string name, int line) : source_(std::move(source)), name_(std::move(name)), line_(line) {}

  const std::string& name() const { return name_; }
  int line() const { return line_; }
  bool has(const std::string& key) const { return entries_.count(key) != 0; }
  const std::map<std::string, ConfigEntry>& entries() const { return entries_; }
  void set(const std::string& key, std::string value, int line);

  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key, int fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<double> get_list(const std::string& key, const std::vector<double>& fallback) const;

  // Throws for keys outside the allowed set.
  void require_known(const std::vector<std::string>& allowed) const;
  [[noreturn]] void fail(const std::string& key, const std::string& message) const;

 private:
  std::string source_;
  std::string name_;
  int line_ = 0;
  std::map<std::string, ConfigEntry> entries_;
};

// Flat key = value text. Keys before the first [section] are global. '#' starts a comment.
struct Config {
  std::string source;
  ConfigSection global;
  std::vector<ConfigSection> sections;
};

Config parse_config(const std::string& text, const std::string& source = "<config>");
Config load_config(const std::string& path);

}  // namespace ifesim

#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace pta {

// Flat "key = value" configuration. '#' starts a comment. Lists are comma
// separated. Every typed getter marks the key as consumed so callers can
// reject typos via unused().
class Config {
 public:
  static Config parse(const std::string& text, const std::string& source = "<string>");
  static Config load_file(const std::string& path);

  void set(const std::string& key, const std::string& value) { kv_[key] = value; }
  bool has(const std::string& key) const { return kv_.count(key) != 0; }

  double get_double(const std::string& key, double fallback) const;
  long get_int(const std::string& key, long fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  std::vector<double> get_list(const std::string& key, const std::vector<double>& fallback) const;

  std::optional<double> maybe_double(const std::string& key) const;
  std::optional<std::vector<double>> maybe_list(const std::string& key) const;

  std::vector<std::string> unused() const;
  const std::map<std::string, std::string>& entries() const { return kv_; }

 private:
  const std::string* lookup(const std::string& key) const;

  std::map<std::string, std::string> kv_;
  mutable std::set<std::string> used_;
};

double parse_double(const std::string& text, const std::string& what);
std::vector<double> parse_list(const std::string& text, const std::string& what);

}  // namespace pta

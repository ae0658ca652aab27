#include "pta/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "pta/errors.hpp"

namespace pta {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

}  // namespace

double parse_double(const std::string& text, const std::string& what) {
  const std::string t = trim(text);
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(t, &used);
  } catch (const std::exception&) {
    throw ConfigError(what + ": not a number: '" + text + "'");
  }
  if (used != t.size()) throw ConfigError(what + ": trailing characters in '" + text + "'");
  if (!std::isfinite(v)) throw ConfigError(what + ": value must be finite");
  return v;
}

std::vector<double> parse_list(const std::string& text, const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (trim(item).empty()) continue;
    out.push_back(parse_double(item, what));
  }
  if (out.empty()) throw ConfigError(what + ": empty list");
  return out;
}

Config Config::parse(const std::string& text, const std::string& source) {
  Config c;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(source + ":" + std::to_string(lineno) + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(source + ":" + std::to_string(lineno) + ": empty key");
    if (c.has(key)) throw ConfigError(source + ":" + std::to_string(lineno) + ": duplicate key " + key);
    c.kv_[key] = val;
  }
  return c;
}

Config Config::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str(), path);
}

const std::string* Config::lookup(const std::string& key) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) return nullptr;
  used_.insert(key);
  return &it->second;
}

double Config::get_double(const std::string& key, double fallback) const {
  const auto* v = lookup(key);
  return v ? parse_double(*v, key) : fallback;
}

std::optional<double> Config::maybe_double(const std::string& key) const {
  const auto* v = lookup(key);
  if (!v) return std::nullopt;
  return parse_double(*v, key);
}

long Config::get_int(const std::string& key, long fallback) const {
  const auto* v = lookup(key);
  if (!v) return fallback;
  const double d = parse_double(*v, key);
  if (d != std::floor(d)) throw ConfigError(key + ": expected an integer");
  return static_cast<long>(d);
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  const auto* v = lookup(key);
  if (!v) return fallback;
  if (*v == "true" || *v == "1" || *v == "yes" || *v == "on") return true;
  if (*v == "false" || *v == "0" || *v == "no" || *v == "off") return false;
  throw ConfigError(key + ": expected a boolean, got '" + *v + "'");
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
  const auto* v = lookup(key);
  return v ? *v : fallback;
}

std::vector<double> Config::get_list(const std::string& key,
                                     const std::vector<double>& fallback) const {
  const auto* v = lookup(key);
  return v ? parse_list(*v, key) : fallback;
}

std::optional<std::vector<double>> Config::maybe_list(const std::string& key) const {
  const auto* v = lookup(key);
  if (!v) return std::nullopt;
  return parse_list(*v, key);
}

std::vector<std::string> Config::unused() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : kv_)
    if (!used_.count(k)) out.push_back(k);
  return out;
}

}  // namespace pta

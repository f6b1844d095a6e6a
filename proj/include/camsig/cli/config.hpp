#pragma once

#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "camsig/common.hpp"

namespace camsig::cli {

// Flat key = value configuration with typed accessors. Lookups record the
// effective value (default or explicit) so reports can dump the full
// configuration actually used.
class Config {
 public:
  Config() = default;

  static Config load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot read config file: " + path);
    Config cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const std::string t = trim(line);
      if (t.empty() || t[0] == '#') continue;
      const size_t eq = t.find('=');
      if (eq == std::string::npos)
        throw DataError("config line " + std::to_string(lineno) + " is not key = value");
      cfg.set(trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
    }
    return cfg;
  }

  void set(const std::string& key, const std::string& value) {
    if (key.empty()) throw DataError("config: empty key");
    values_[key] = value;
  }

  // "key=value" CLI override
  void set_override(const std::string& kv) {
    const size_t eq = kv.find('=');
    if (eq == std::string::npos) throw UsageError("--set expects key=value, got: " + kv);
    set(trim(kv.substr(0, eq)), trim(kv.substr(eq + 1)));
  }

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  std::string get_string(const std::string& key, const std::string& fallback) const {
    auto it = values_.find(key);
    const std::string v = it == values_.end() ? fallback : it->second;
    effective_[key] = v;
    return v;
  }

  int get_int(const std::string& key, int fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) {
      effective_[key] = std::to_string(fallback);
      return fallback;
    }
    try {
      const int v = std::stoi(it->second);
      effective_[key] = it->second;
      return v;
    } catch (...) {
      throw DataError("config: " + key + " is not an integer: " + it->second);
    }
  }

  uint64_t get_u64(const std::string& key, uint64_t fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) {
      effective_[key] = std::to_string(fallback);
      return fallback;
    }
    try {
      const uint64_t v = std::stoull(it->second);
      effective_[key] = it->second;
      return v;
    } catch (...) {
      throw DataError("config: " + key + " is not an unsigned integer: " + it->second);
    }
  }

  double get_double(const std::string& key, double fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) {
      effective_[key] = fmt_trim(fallback);
      return fallback;
    }
    try {
      const double v = std::stod(it->second);
      effective_[key] = it->second;
      return v;
    } catch (...) {
      throw DataError("config: " + key + " is not a number: " + it->second);
    }
  }

  bool get_bool(const std::string& key, bool fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) {
      effective_[key] = fallback ? "true" : "false";
      return fallback;
    }
    effective_[key] = it->second;
    if (it->second == "true" || it->second == "1") return true;
    if (it->second == "false" || it->second == "0") return false;
    throw DataError("config: " + key + " is not a boolean: " + it->second);
  }

  // Deterministic dump of every key consulted so far plus explicit settings.
  std::string dump_effective() const {
    std::map<std::string, std::string> merged = effective_;
    for (const auto& [k, v] : values_) merged[k] = v;
    std::ostringstream out;
    for (const auto& [k, v] : merged) out << k << " = " << v << '\n';
    return out.str();
  }

  uint64_t hash() const {
    uint64_t h = 0xcbf29ce484222325ull;
    for (const auto& [k, v] : values_) h = fnv1a64(v, fnv1a64(k, h));
    return h;
  }

 private:
  std::map<std::string, std::string> values_;
  mutable std::map<std::string, std::string> effective_;
};

}  // namespace camsig::cli

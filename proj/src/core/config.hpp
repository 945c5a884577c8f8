#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "core/common.hpp"

namespace dbar {

// Structured key-value config ("key = value" lines, '#' comments). Keys are
// dotted paths (grid.n, spectral.lambda_max, experiment.delta_list, ...).
class Config {
 public:
  Config() = default;
  static Config from_file(const std::string& path);
  static Config from_string(const std::string& text);

  bool has(const std::string& key) const { return kv_.count(key) > 0; }
  void set(const std::string& key, const std::string& value) { kv_[key] = value; }

  std::string get_str(const std::string& key, const std::string& fallback) const;
  std::string require_str(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key, int fallback) const;
  std::vector<double> get_list(const std::string& key, const std::vector<double>& fallback) const;

  // full echo, sorted by key, for run-metadata files
  std::string dump() const;
  const std::map<std::string, std::string>& entries() const { return kv_; }

 private:
  std::map<std::string, std::string> kv_;
};

}  // namespace dbar

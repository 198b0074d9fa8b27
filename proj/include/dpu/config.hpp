#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace dpu {

// Flat "key = value" configuration with '#' comments. Keys are
// section-scoped ("train.learning_rate"). Environment variables override
// file values: DPU_TRAIN_LEARNING_RATE maps to train.learning_rate (the
// first underscore after the prefix splits the section).
class Config {
 public:
  static Config parse_text(const std::string& text);
  static Config parse_file(const std::string& path);

  void apply_env(const char* prefix = "DPU_");

  bool has(const std::string& key) const { return values_.count(key) > 0; }
  void set(const std::string& key, const std::string& value) { values_[key] = value; }

  std::string get_str(const std::string& key, const std::string& fallback) const;
  double get_num(const std::string& key, double fallback) const;
  std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<double> get_list(const std::string& key) const;  // comma-separated

  std::string require_str(const std::string& key) const;

  std::string serialize() const;       // sorted, canonical
  std::uint64_t hash() const;          // over the canonical serialization
  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

std::string hash_hex(std::uint64_t h);

}  // namespace dpu

#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace ranperf {

/// Flat key=value configuration. Keys use dots for sections
/// ("window.duration_sec=600"); '#' starts a comment; whitespace around
/// keys and values is trimmed. Last assignment of a duplicate key wins.
using ConfigMap = std::map<std::string, std::string>;

ConfigMap parse_config_text(const std::string& text);
ConfigMap load_config_file(const std::string& path);

std::vector<std::string> split_list(const std::string& value, char sep = ',');

/// Read-through view that records which keys were consumed so callers can
/// reject unknown keys after parsing (PipelineConfig invariant).
class ConfigView {
 public:
  explicit ConfigView(ConfigMap values) : values_(std::move(values)) {}

  bool has(const std::string& key) const;

  std::string get_string(const std::string& key, const std::string& fallback);
  std::string require_string(const std::string& key);
  double get_double(const std::string& key, double fallback);
  double require_double(const std::string& key);
  std::int64_t get_int(const std::string& key, std::int64_t fallback);
  std::int64_t require_int(const std::string& key);
  bool get_bool(const std::string& key, bool fallback);
  std::vector<double> get_doubles(const std::string& key,
                                  const std::vector<double>& fallback);

  /// Marks every key with this prefix consumed and returns them.
  std::map<std::string, std::string> take_prefix(const std::string& prefix);

  /// Throws ConfigError naming every key never consumed.
  void reject_unknown_keys() const;

  const ConfigMap& values() const { return values_; }

 private:
  std::optional<std::string> fetch(const std::string& key);

  ConfigMap values_;
  std::set<std::string> consumed_;
};

}  // namespace ranperf

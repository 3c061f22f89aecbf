#include "ranperf/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "ranperf/errors.hpp"

namespace ranperf {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

}  // namespace

ConfigMap parse_config_text(const std::string& text) {
  ConfigMap out;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string stripped = trim(line);
    if (stripped.empty()) continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) +
                        ": expected key=value, got '" + stripped + "'");
    }
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    if (key.empty()) {
      throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
    }
    out[key] = value;
  }
  return out;
}

ConfigMap load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

std::vector<std::string> split_list(const std::string& value, char sep) {
  std::vector<std::string> out;
  std::string current;
  std::istringstream in(value);
  while (std::getline(in, current, sep)) out.push_back(trim(current));
  if (!value.empty() && value.back() == sep) out.push_back("");
  return out;
}

bool ConfigView::has(const std::string& key) const {
  return values_.count(key) != 0;
}

std::optional<std::string> ConfigView::fetch(const std::string& key) {
  consumed_.insert(key);
  const auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

std::string ConfigView::get_string(const std::string& key,
                                   const std::string& fallback) {
  return fetch(key).value_or(fallback);
}

std::string ConfigView::require_string(const std::string& key) {
  auto v = fetch(key);
  if (!v) throw ConfigError("missing required config key: " + key);
  return *v;
}

double ConfigView::get_double(const std::string& key, double fallback) {
  auto v = fetch(key);
  if (!v) return fallback;
  char* end = nullptr;
  const double d = std::strtod(v->c_str(), &end);
  if (end == v->c_str() || *end != '\0') {
    throw ConfigError("config key " + key + ": not a number: '" + *v + "'");
  }
  return d;
}

double ConfigView::require_double(const std::string& key) {
  if (!has(key)) throw ConfigError("missing required config key: " + key);
  return get_double(key, 0.0);
}

std::int64_t ConfigView::get_int(const std::string& key, std::int64_t fallback) {
  auto v = fetch(key);
  if (!v) return fallback;
  char* end = nullptr;
  const long long i = std::strtoll(v->c_str(), &end, 10);
  if (end == v->c_str() || *end != '\0') {
    throw ConfigError("config key " + key + ": not an integer: '" + *v + "'");
  }
  return i;
}

std::int64_t ConfigView::require_int(const std::string& key) {
  if (!has(key)) throw ConfigError("missing required config key: " + key);
  return get_int(key, 0);
}

bool ConfigView::get_bool(const std::string& key, bool fallback) {
  auto v = fetch(key);
  if (!v) return fallback;
  if (*v == "true" || *v == "1" || *v == "yes") return true;
  if (*v == "false" || *v == "0" || *v == "no") return false;
  throw ConfigError("config key " + key + ": not a boolean: '" + *v + "'");
}

std::vector<double> ConfigView::get_doubles(const std::string& key,
                                            const std::vector<double>& fallback) {
  auto v = fetch(key);
  if (!v) return fallback;
  std::vector<double> out;
  for (const auto& item : split_list(*v)) {
    char* end = nullptr;
    const double d = std::strtod(item.c_str(), &end);
    if (end == item.c_str() || *end != '\0') {
      throw ConfigError("config key " + key + ": not a number: '" + item + "'");
    }
    out.push_back(d);
  }
  return out;
}

std::map<std::string, std::string> ConfigView::take_prefix(
    const std::string& prefix) {
  std::map<std::string, std::string> out;
  for (const auto& [k, v] : values_) {
    if (k.rfind(prefix, 0) == 0) {
      consumed_.insert(k);
      out.emplace(k, v);
    }
  }
  return out;
}

void ConfigView::reject_unknown_keys() const {
  std::string unknown;
  for (const auto& [k, v] : values_) {
    (void)v;
    if (!consumed_.count(k)) {
      if (!unknown.empty()) unknown += ", ";
      unknown += k;
    }
  }
  if (!unknown.empty()) throw ConfigError("unknown config keys: " + unknown);
}

}  // namespace ranperf

#pragma once

#include <stdexcept>
#include <string>

namespace ranperf {

/// Invalid or inconsistent configuration (bad keys, out-of-range settings).
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Filesystem / stream failures.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

/// Input data violates a documented precondition (dimension mismatch,
/// degenerate matrix, non-finite values).
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

/// Model/feature schema mismatch between producer and consumer.
class SchemaError : public std::runtime_error {
 public:
  explicit SchemaError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace ranperf

#pragma once

#include <stdexcept>
#include <string>

namespace iotids {

// Malformed or unreadable input data (CSV schema, cell values, labels).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid pipeline configuration or hyperparameters.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A model could not be fitted on the given data (e.g. a single class present).
class FitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace iotids

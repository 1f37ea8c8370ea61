#pragma once

#include <stdexcept>
#include <string>

namespace sedge {

// Error taxonomy shared by the library and the CLI.
// The CLI maps these to process exit codes: config=2, data=3, numeric=4.

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void check_config(bool cond, const std::string& msg) {
  if (!cond) throw ConfigError(msg);
}

inline void check_data(bool cond, const std::string& msg) {
  if (!cond) throw DataError(msg);
}

}  // namespace sedge

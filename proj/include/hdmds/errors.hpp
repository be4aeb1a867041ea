#pragma once

#include <stdexcept>
#include <string>

namespace hdmds {

// Error taxonomy mirrored by the CLI exit codes:
//   config_error    -> 2  (bad flags, out-of-range lags, invalid model parameters)
//   data_error      -> 3  (malformed CSV, non-finite cells, too few rows)
//   numerical_error -> 4  (singular matrices, condition-number guards)
struct config_error : std::runtime_error {
  explicit config_error(const std::string& msg) : std::runtime_error(msg) {}
};

struct data_error : std::runtime_error {
  explicit data_error(const std::string& msg) : std::runtime_error(msg) {}
};

struct numerical_error : std::runtime_error {
  explicit numerical_error(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace hdmds

#pragma once

#include <stdexcept>
#include <string>

namespace driftscan {

// Error taxonomy; the CLI maps these to process exit codes 2/3/4.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ComputeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Structured warning line on stderr: "[warn] <msg>".
void log_warn(const std::string& msg);

// Structured info line on stderr: "[info] <msg>".
void log_info(const std::string& msg);

}  // namespace driftscan

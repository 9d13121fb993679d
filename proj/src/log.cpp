#include "driftscan/errors.hpp"

#include <iostream>

namespace driftscan {

void log_warn(const std::string& msg) { std::cerr << "[warn] " << msg << "\n"; }

void log_info(const std::string& msg) { std::cerr << "[info] " << msg << "\n"; }

}  // namespace driftscan

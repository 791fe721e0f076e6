#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "aosr/error.hpp"

namespace aosr::cli {

/// 0 on success, 1 on validation or input errors, 2 on numerical failures.
int exit_code_for(ErrorKind kind);

/// `key = value` lines with `#` comments. Keys outside `allowed` are rejected.
std::map<std::string, std::string> parse_flat_config(std::string_view text, const std::vector<std::string>& allowed);
std::string format_flat_config(const std::map<std::string, std::string>& values);

/// Entry point shared by the executable and the tests. args[0] is the program name.
int run(const std::vector<std::string>& args);

}  // namespace aosr::cli

#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace satflow {

inline constexpr const char* kVersion = "0.1.0";

/// Exit codes: 0 success, 1 runtime failure (solver, I/O, shape mismatch), 2 invalid configuration or usage.
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace satflow

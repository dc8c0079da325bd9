#pragma once

#include <string>
#include <vector>

namespace genfrac::cli {

inline constexpr const char* tool_version = "0.1.0";

/// Entry point of the genfrac tool. Returns 0 on success, 1 on a numerical
/// failure (a diagnostic JSON object is printed) and 2 on a usage error.
int dispatch(int argc, char** argv);

/// Same, for an argument list without the program name.
int dispatch(const std::vector<std::string>& args);

} // namespace genfrac::cli

#pragma once

#include <string>
#include <vector>

#include "cmcs/version.hpp"

namespace cmcs::cli {

using cmcs::kVersion;

/// Run the command-line tool. Exit codes: 0 on success (statistical
/// non-rejection is success), 2 on input/validation errors, 1 on unexpected
/// failures.
int run(const std::vector<std::string>& args);

}  // namespace cmcs::cli

#pragma once

#include <string>
#include <vector>

namespace igram {

// Parses and runs one command-line invocation. args excludes the program
// name. Returns the process exit code: 0 success, 1 operational failure,
// 2 usage error (unknown flag/subcommand, bad value).
int cli_dispatch(const std::vector<std::string>& args);

}  // namespace igram

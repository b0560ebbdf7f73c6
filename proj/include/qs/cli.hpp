#pragma once

#include <string>
#include <vector>

namespace qs {

// Runs the command-line tool on the given arguments (program name excluded).
// Returns the process exit code: 0 on success, 1 when a mathematical check
// fails, 2 on malformed input or usage errors. Diagnostic text goes to stderr,
// results to stdout.
int run_cli(std::vector<std::string> args);

}  // namespace qs

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace momentfit::cli {

enum ExitCode : int { ok = 0, input_error = 2, numeric_error = 3, acceptance_failed = 4 };

// Runs the command line `args` (without the program name).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace momentfit::cli

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace agg::cli {

enum ExitCode : int { kOk = 0, kFailed = 1, kUsage = 2, kComputation = 3 };

// Runs one command. `args` excludes the program name. Exactly one JSON
// document goes to `out`; human-readable diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace agg::cli

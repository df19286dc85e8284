#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace hierseg::cli {

// Runs one `hierseg <subcommand> ...` invocation; `args` excludes the program
// name. Returns the process exit code: 0 on success, 2 for input or
// configuration errors, 3 for numerical failures.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace hierseg::cli

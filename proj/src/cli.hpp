#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace danr::cli {

enum ExitCode { ok = 0, invalid_input = 1, solver_failure = 2 };

/// Parses arguments and runs one subcommand. Messages go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace danr::cli

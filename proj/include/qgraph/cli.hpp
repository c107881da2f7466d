#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace qgraph {

/// Exit status of the command-line tool.
enum ExitCode : int { exit_ok = 0, exit_io = 1, exit_validation = 2, exit_theorem = 3 };

/// Runs one invocation; `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// "a:b:n" (n evenly spaced points) or a comma separated list.
std::vector<double> parse_grid(const std::string& text);

}  // namespace qgraph

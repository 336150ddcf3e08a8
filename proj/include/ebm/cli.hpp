#pragma once

#include <string>
#include <vector>

namespace ebm::cli {

/// Runs the command-line front door; args exclude the program name.
/// Exit codes: 0 ok, 2 config error, 3 blow-up verdict (simulate), 4 io
/// error, 5 regime precondition not met.
int run(const std::vector<std::string>& args);

} // namespace ebm::cli

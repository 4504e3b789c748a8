#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace snar::cli {

/// Runs one command line (args[0] is the program name). Returns 0 on success,
/// 1 on usage errors (after printing the synopsis to err) and 2 on runtime errors.
int cli_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int cli_dispatch(int argc, const char* const* argv);

}  // namespace snar::cli

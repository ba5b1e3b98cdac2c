#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace memchain::cli {

/// Runs the command line `args` (args[0] is the program name). Returns 0 on
/// success, 1 on a domain error (infeasible embedding, invalid rates, ...)
/// and 2 on usage or parse errors.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace memchain::cli

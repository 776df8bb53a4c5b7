#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace adhocgrid {

/// Entry point of the command-line tool. `args` excludes the program name.
/// Returns 0 on success, 1 when a certificate fails or a fuzz run finds a
/// violation, 2 on usage or input errors.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace adhocgrid

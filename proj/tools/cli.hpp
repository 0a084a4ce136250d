#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace lip {

// Runs one lipctl invocation. args excludes the program name. Returns the
// process exit status: 0 ok, 2 validation, 3 numerical, 4 I/O.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace lip

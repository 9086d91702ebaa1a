#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace probcomb::cli {

// Runs one command line (args excludes the program name). Returns the exit
// status: 0 ok, 2 input validation, 3 constraint violation, 4 I/O.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace probcomb::cli

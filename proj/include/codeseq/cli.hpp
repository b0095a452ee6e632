#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace codeseq::cli {

// Runs the `codeseq` command line (args excludes the program name).
// Returns 0 on success, 1 after printing "error: <Kind>: <message>" to err,
// and 2 on usage errors.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace codeseq::cli

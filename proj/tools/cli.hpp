#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace pathways::cli {

// Runs the command line in-process. Exit codes: 0 success, 1 usage or
// parse failure, 2 simulation failure.
int main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace pathways::cli

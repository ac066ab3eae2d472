#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace qbayes::cli {

// Exit codes: 0 success / Exists / check passed, 1 input or validation
// error, 2 FailsSelfAdjoint, 3 FailsCompletion, 4 check failed, 5 internal error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace qbayes::cli

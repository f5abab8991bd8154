#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace hintscope::cli {

/// Exit codes: 0 success, 1 runtime failure, 2 usage error or missing input.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace hintscope::cli

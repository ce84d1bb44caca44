#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace sweep {

/// Exit codes: 0 success, 1 input or computation error, 2 verification failure.
/// `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace sweep

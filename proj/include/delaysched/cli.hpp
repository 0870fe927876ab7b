#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace delaysched {

/// Exit codes of the command-line front end.
inline constexpr int kExitSuccess = 0;
inline constexpr int kExitFailure = 1;  // validation, assertion or simulation failure
inline constexpr int kExitUsage = 2;    // usage or configuration error

/// Entry point of the `delaysched` tool; args[0] is the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace delaysched

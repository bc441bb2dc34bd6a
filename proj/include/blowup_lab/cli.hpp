#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace blowup_lab {

inline constexpr const char* kToolVersion = "0.1.0";

// Runs one subcommand; args excludes the program name. Returns 0 on
// success, 2 on a precondition or verdict failure and 1 on internal errors.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace blowup_lab

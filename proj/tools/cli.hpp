#ifndef DRN_TOOLS_CLI_HPP
#define DRN_TOOLS_CLI_HPP

#include <iosfwd>
#include <string>
#include <vector>

namespace drn::cli {

enum ExitCode : int { kSuccess = 0, kUsageError = 1, kCheckFailure = 2, kRuntimeError = 3 };

// args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace drn::cli

#endif  // DRN_TOOLS_CLI_HPP

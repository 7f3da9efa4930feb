#ifndef RISKRNN_CLI_COMMANDS_H_
#define RISKRNN_CLI_COMMANDS_H_

#include <iosfwd>
#include <string>
#include <vector>

namespace riskrnn::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfig = 2;

// Entry point shared by the executable and in-process callers. `args` excludes
// the program name. Any `--section.key value` (or `--section.key=value`)
// argument overrides the config file.
int RunCli(const std::vector<std::string>& args, std::ostream& out,
           std::ostream& err);

}  // namespace riskrnn::cli

#endif  // RISKRNN_CLI_COMMANDS_H_

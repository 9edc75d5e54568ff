#ifndef BERRYBELL_TOOLS_CLI_HPP_
#define BERRYBELL_TOOLS_CLI_HPP_

#include <iosfwd>
#include <string>
#include <vector>

namespace berrybell::cli
{

enum ExitCode : int
{
  kSuccess = 0,
  kUsageError = 1,
  kToleranceViolation = 2
};

/// Runs the command line front end. `args` excludes the program name.
/// Report text goes to `out` unless --out redirects it; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace berrybell::cli

#endif  // BERRYBELL_TOOLS_CLI_HPP_

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace bugenrich {

/// Parses `args` (program name excluded), runs the command and returns the
/// process exit status: 0 ok, 1 usage or config, 2 data validation, 3 runtime.
/// Artifacts without an output path and reports go to `out`; logs to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace bugenrich

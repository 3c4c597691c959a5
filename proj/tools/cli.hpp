#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace wnet::cli {

/// Entry point of the `wnet` tool; `args` excludes the program name.
/// Returns the process exit code: 0 on success, 2 for usage errors, 1 for
/// everything else. Failures print one line to `err`:
///   error kind=<kind> message=<JSON string>
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace wnet::cli

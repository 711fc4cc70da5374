#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace crdsa::cli {

enum ExitCode : int {
    kSuccess = 0,
    kRuntimeFailure = 1,
    kInvalidConfig = 2,
};

/// Runs one `crdsa` command line (argv without the program name). Results go
/// to files under --out; the short summary and diagnostics go to the streams.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace crdsa::cli

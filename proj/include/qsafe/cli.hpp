#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace qsafe::cli {

enum ExitCode : int {
    kSatisfied = 0,
    kNotSatisfied = 1, // also infeasible
    kUsageError = 2,   // usage, parse or semantic error
    kInternalError = 3,
};

/// Runs one `qsafe` invocation. `args` excludes the program name. Reports go
/// to `out`, diagnostics to `err`.
[[nodiscard]] int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace qsafe::cli

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace selfsim::cli {

// Exit codes: 0 all verdicts pass, 2 validation failure, 3 theorem check
// failed, 4 I/O or parse error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitTheorem = 3;
inline constexpr int kExitIo = 4;

// Runs one CLI invocation (args without the program name) against the
// given streams; never calls exit().
int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

}  // namespace selfsim::cli

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace komatsu::cli {

enum ExitCode : int { kSuccess = 0, kRefuted = 1, kUndecided = 2 };

// Runs one command line (args excludes the program name). Summaries go to
// `out`, diagnostics to `err`; reports are written under --out.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace komatsu::cli

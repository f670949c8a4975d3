#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace tgeval::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kUsage = 1;
inline constexpr int kDataError = 2;
inline constexpr int kNumericalError = 3;
inline constexpr int kModelError = 4;

/// Runs one command line (args[0] is the program name). Results go to
/// `out`, diagnostics and usage text to `err`.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace tgeval::cli

#pragma once

#include <ostream>

namespace proxident::cli {

/// Exit codes of the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitIdentification = 1;
inline constexpr int kExitInput = 2;

/// Parse argv, run one subcommand, write its report. Never throws.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace proxident::cli

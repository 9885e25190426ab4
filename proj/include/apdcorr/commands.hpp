// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>

namespace apdcorr {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitNumeric = 3;

/// Entry point of the `apdcorr` tool: subcommands design, tradeoff and simulate.
/// Returns the process exit code; nothing is written outside `out`, `err` and the
/// files named by flags.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace apdcorr

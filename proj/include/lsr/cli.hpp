#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>

namespace lsr {

/// Exit codes of the command-line tool.
enum ExitCode : int { exit_ok = 0, exit_runtime = 1, exit_config = 2 };

/// 64-bit FNV-1a, printed in sidecars as 16 hex digits.
std::uint64_t fnv1a64(std::string_view data) noexcept;

/// Runs one subcommand; args excludes the program name.
int run_cli(std::span<const std::string> args, std::ostream& out, std::ostream& err);

int run_cli(int argc, const char* const* argv);

}  // namespace lsr

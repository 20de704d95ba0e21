/**
 * @file cli.hpp
 * @brief Command-line front end.
 */
#pragma once

#include <iosfwd>

namespace ragkit {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// Runs one subcommand. Returns 0 on success, 1 on an operational error, 2 on a usage error.
int cli_dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace ragkit

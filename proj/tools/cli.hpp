#pragma once

#include <json.hpp>

#include <iosfwd>

namespace wkbgreen::cli {

/// Exit codes of the command-line front end.
enum Exit : int {
    ok = 0,
    criterion_failed = 1,
    config_error = 2,
    solver_error = 3,
};

/// Parses argv (subcommands green, manifold, smallt, oracle, validate), runs
/// the command and writes results to `out` (or --output) and diagnostics to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace wkbgreen::cli

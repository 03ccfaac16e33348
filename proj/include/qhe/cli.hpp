// cli.hpp: Experiment subcommands and the command-line front end.

#pragma once

#include <iosfwd>

#include "qhe/config.hpp"
#include "qhe/report.hpp"

namespace qhe {

enum class ExitCode : int { ok = 0, numerical = 1, config = 2 };

/// One row per engine type with the steady-state cycle ledger.
Report cmd_steady(const RunConfig& c);
/// Every segment boundary of n_cycles cycles from the configured initial state.
Report cmd_transient(const RunConfig& c);
/// Steady state over the action or gamma grid.
Report cmd_sweep(const RunConfig& c);
/// Coherent and dephased power against the stochastic bound on the m grid.
Report cmd_signature(const RunConfig& c);
/// Invariant suite; `passed` receives the overall verdict.
Report cmd_verify(const RunConfig& c, bool& passed);

/// Parses arguments, runs one subcommand and writes its output. Nothing is
/// written to `out` or the output directory unless the run succeeds.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace qhe

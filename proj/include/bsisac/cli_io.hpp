// cli_io.hpp
// Configuration schema, command-line surface, and CSV emitters.
//
// SPDX-License-Identifier: MIT
// Copyright (c) 2026 bsisac contributors. See LICENSE for details.

/**
 * @file cli_io.hpp
 * @brief Configuration loading and the `bsisac` command-line tool.
 *
 * Configuration is a flat INI-style text format with sections
 * [scenario], [physics], [pulse], [solver], [sweep], [simulation]; README.md
 * documents every key.  Decibel quantities are accepted only in the
 * [physics] section and converted to linear units exactly once at load; all
 * library APIs are linear/watts.
 *
 * Subcommands: crb | rate | optimize | sweep | simulate | validate.
 * Exit codes: 0 success, 1 internal error, 2 configuration error,
 * 3 infeasible optimization, 4 validation failure.
 *
 * All numeric output is formatted with std::to_chars (shortest roundtrip,
 * locale-independent), so identical configurations and seeds produce
 * byte-identical records; the sweep CSV's `seconds` column is the one
 * deliberate exception (wall-clock timing).
 */

#ifndef BSISAC_CLI_IO_HPP
#define BSISAC_CLI_IO_HPP

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "bsisac/geometry.hpp"
#include "bsisac/optimizer.hpp"
#include "bsisac/pulses.hpp"
#include "bsisac/simulate.hpp"

namespace bsisac::io {

/// Sweep-grid request: explicit bounds or automatic from the probe certificate.
struct SweepSpec {
    int count = 15;                       ///< Grid points (>= 1).
    double gamma_min = 0.0;               ///< Lower end [bits/s/Hz].
    std::optional<double> gamma_max;      ///< Upper end; empty -> 1.1 * certificate.
};

/// Fully validated, unit-converted run configuration.
struct Config {
    geometry::Scenario scenario;          ///< Scene + physics (linear units).
    pulses::PulseShape pulse;             ///< Selected pulse shape.
    int quadrature_points = 4097;         ///< Pulse-constant quadrature resolution.
    opt::SolverOptions solver;            ///< Interior-point controls.
    SweepSpec sweep;                      ///< Sweep-grid request.
    sim::SimulationRun simulation;        ///< Monte-Carlo controls.
    double gamma_th = 0.0;                ///< Rate floor for `optimize` [bits/s/Hz].
};

/**
 * @brief Loads and validates a configuration file.
 *
 * Unknown sections/keys, malformed values, and violated invariants raise
 * ConfigError with file/line or section.key context.  A `preset` key in
 * [scenario] starts from geometry::preset and explicit keys override it.
 *
 * @throws ConfigError on any parse or validation problem.
 */
Config load_config(const std::string& path);

/// Builds the default configuration for a named preset ("scenario-1"/"scenario-2").
Config config_from_preset(std::string_view name);

/**
 * @brief Serializes a configuration back to the INI schema (stable key
 *        order); load_config(serialize(c)) reproduces c exactly.
 */
std::string serialize_config(const Config& config);

/// Parses INI text (used by load_config; exposed for tests).
Config parse_config_text(const std::string& text, const std::string& origin = "<string>");

/**
 * @brief Shortest-roundtrip, locale-independent numeric formatting
 *        (std::to_chars).
 */
std::string format_double(double value);

/**
 * @brief Column-by-column documentation of every emitted record/CSV for one
 *        subcommand (the `--describe-output` text).
 */
std::string describe_output(std::string_view subcommand);

/**
 * @brief Runs the command-line tool.
 *
 * @param args  argv-style arguments excluding the program name.
 * @param out   Stream for records/CSV (stdout in main()).
 * @param err   Stream for diagnostics (stderr in main()).
 * @return Process exit code (see file comment).
 */
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace bsisac::io

#endif // BSISAC_CLI_IO_HPP

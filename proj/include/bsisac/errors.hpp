// errors.hpp
// Exception taxonomy shared by all bsisac modules.
//
// SPDX-License-Identifier: MIT
// Copyright (c) 2026 bsisac contributors. See LICENSE for details.

/**
 * @file errors.hpp
 * @brief Typed exceptions used across the library, mapped to CLI exit codes.
 *
 * The command-line front end translates these into process exit codes:
 * ConfigError -> 2, InfeasibleError -> 3, ValidationError -> 4, everything
 * else (including GeometryError and NumericalError escaping a computation)
 * -> 1.  Library users can catch the specific types.
 */

#ifndef BSISAC_ERRORS_HPP
#define BSISAC_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace bsisac {

/// Malformed or inconsistent user input (config file, CLI flags, presets).
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// A requested rate floor exceeds what any feasible covariance can deliver.
class InfeasibleError : public std::runtime_error {
public:
    explicit InfeasibleError(const std::string& what) : std::runtime_error(what) {}
};

/// A built-in self check (cross-validation of two computation paths) failed.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

/// Geometric inversion is undefined at the requested point
/// (e.g. the delay/angle pair lies outside the valid bistatic region).
class GeometryError : public std::domain_error {
public:
    explicit GeometryError(const std::string& what) : std::domain_error(what) {}
};

/// A numerical routine lost the preconditions it needs
/// (singular information matrix, non-positive-definite factorization, ...).
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace bsisac

#endif // BSISAC_ERRORS_HPP

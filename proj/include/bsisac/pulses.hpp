// pulses.hpp
// Transmit pulse shapes and the scalar constants they contribute to the
// Fisher information matrix.
//
// SPDX-License-Identifier: MIT
// Copyright (c) 2026 bsisac contributors. See LICENSE for details.

/**
 * @file pulses.hpp
 * @brief Pulse-shape definitions and their information-bearing constants.
 *
 * Every delay/angle information expression in this library depends on the
 * transmit pulse g(t), supported on [0, dt], only through four scalars:
 *
 *  - average power      p_g   = (1/dt) * integral |g|^2
 *  - energy             eps_g = integral |g|^2            [s]
 *  - mean-square bandwidth msb = integral |g'|^2 / eps_g  [1/s^2]
 *  - derivative overlap eps_gdot = integral g'(t)* g(t) dt  (complex-valued
 *    slot; real for the built-in real pulses, where it equals
 *    (g(dt)^2 - g(0)^2)/2 exactly)
 *
 * Three built-in unit-power shapes are provided (selectable as g1/g2/g3 on
 * the CLI):
 *
 *  - cosine  (g1): sqrt(2) * cos(pi t / (2 dt))      — quarter-cosine taper
 *  - sinc    (g2): sqrt(pi/a) * sinc(t/dt) with sinc(x) = sin(pi x)/(pi x)
 *                  and a = integral_0^pi sin^2 x / x^2 dx (~1.41815)
 *  - linear  (g3): sqrt(3) * (1 - t/dt)              — decaying ramp
 *
 * Constants are computed by composite Simpson quadrature; derivatives use
 * the analytic form when a shape provides one, otherwise central finite
 * differences with step dt/1e6 (one-sided at the endpoints).
 */

#ifndef BSISAC_PULSES_HPP
#define BSISAC_PULSES_HPP

#include <complex>
#include <functional>
#include <string>
#include <string_view>

namespace bsisac::pulses {

/// Built-in pulse families plus a programmatic escape hatch.
enum class PulseKind { kCosine, kSinc, kLinear, kCustom };

/**
 * @brief A pulse shape: evaluator plus optional analytic derivative.
 *
 * Evaluators receive (t, dt) and must be finite on [0, dt].  Outside that
 * interval the library treats the pulse as identically zero; evaluators are
 * never called there.
 */
struct PulseShape {
    PulseKind kind = PulseKind::kCustom;
    std::string name = "custom";
    std::function<double(double t, double dt)> value;      ///< g(t); required.
    std::function<double(double t, double dt)> derivative; ///< g'(t); may be empty.
};

/// The four scalars a pulse contributes to the information matrix.
struct PulseConstants {
    double avg_power = 0.0;                  ///< p_g (dimensionless).
    double energy = 0.0;                     ///< eps_g [s].
    double msb = 0.0;                        ///< Mean-square bandwidth [1/s^2].
    std::complex<double> deriv_overlap{0.0}; ///< eps_gdot (dimensionless).
    double dt = 0.0;                         ///< Symbol duration the constants were computed for [s].
};

/**
 * @brief Builds one of the built-in pulse shapes (with analytic derivatives).
 */
PulseShape make_pulse(PulseKind kind);

/**
 * @brief Looks a pulse up by name: "g1"/"cosine", "g2"/"sinc", "g3"/"linear".
 * @throws ConfigError for unknown names.
 */
PulseShape make_pulse(std::string_view name);

/**
 * @brief Samples g(t); returns 0 outside [0, dt].
 */
double eval_pulse(const PulseShape& pulse, double t, double dt);

/**
 * @brief Samples g'(t) (analytic if available, else central differences with
 *        step dt/1e6, one-sided at the endpoints); returns 0 outside [0, dt].
 */
double eval_pulse_derivative(const PulseShape& pulse, double t, double dt);

/**
 * @brief Computes the four pulse constants by composite Simpson quadrature.
 *
 * The derivative overlap for real pulses is evaluated through the exact
 * boundary identity (g(dt)^2 - g(0)^2)/2, which the quadrature path must
 * reproduce; the quadrature value is used and the identity is available to
 * callers through the fields themselves.
 *
 * @param pulse              Shape to integrate.
 * @param dt                 Symbol duration [s] (> 0).
 * @param quadrature_points  Number of samples (>= 64; rounded up to odd).
 * @return All four constants plus the dt they refer to.
 * @throws ConfigError     if dt <= 0 or quadrature_points < 64.
 * @throws NumericalError  if any integrand sample is non-finite.
 */
PulseConstants pulse_constants(const PulseShape& pulse, double dt,
                               int quadrature_points = 4097);

/**
 * @brief The normalizer a = integral_0^pi sin^2(x)/x^2 dx of the sinc pulse,
 *        computed once by quadrature (~1.41815157613).
 */
double sinc_normalizer();

} // namespace bsisac::pulses

#endif // BSISAC_PULSES_HPP

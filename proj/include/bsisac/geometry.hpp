// geometry.hpp
// Scene construction: positions, distances, angles, delays, path loss,
// steering vectors, per-device channel matrices, and the closed-form
// bistatic localization inverse.
//
// SPDX-License-Identifier: MIT
// Copyright (c) 2026 bsisac contributors. See LICENSE for details.

/**
 * @file geometry.hpp
 * @brief Physical scene model for a bistatic backscatter link.
 *
 * A transmitter and a receiver, each with a uniform linear array, illuminate
 * L passive backscatter devices (BDs).  This module derives everything the
 * information-theoretic layers need from the node coordinates: pairwise
 * distances, departure/arrival angles, two-hop propagation delays, composite
 * path amplitudes, and the rank-1 per-device channel matrices
 * H_l = a_r(phi_l) a_t(theta_l)^T.
 *
 * It also provides the closed-form inverse: given an estimated two-hop delay
 * and arrival angle, recover the device range/position on the delay ellipse
 * with foci at the transmitter and receiver.
 *
 * All functions are pure and thread-safe.
 */

#ifndef BSISAC_GEOMETRY_HPP
#define BSISAC_GEOMETRY_HPP

#include <Eigen/Dense>
#include <complex>
#include <string_view>
#include <vector>

namespace bsisac::geometry {

/// Speed of light in vacuum [m/s].
inline constexpr double kSpeedOfLight = 299792458.0;

/// 2-D node coordinates in meters.
struct Position {
    double x = 0.0;
    double y = 0.0;
};

/// Uniform-linear-array configuration shared by transmitter and receiver.
struct ArrayConfig {
    int num_tx = 8;                     ///< Transmit elements M_t (>= 1).
    int num_rx = 8;                     ///< Receive elements M_r (>= 1).
    double spacing_ratio = 0.5;         ///< Element spacing over wavelength (> 0).
};

/// One passive backscatter device.
struct BackscatterDevice {
    Position position;                  ///< Device coordinates [m].
    double symbol = 1.0;                ///< Modulation amplitude s_l in [0, 1].
    double reflection_fraction = 1.0;   ///< Fraction of incident power re-radiated, in [0, 1].
};

/**
 * @brief Full scene description; the single source of truth for all
 *        downstream computations.
 */
struct Scenario {
    Position tx_position;                   ///< Transmitter coordinates [m].
    Position rx_position;                   ///< Receiver coordinates [m].
    ArrayConfig array;                      ///< Array geometry.
    std::vector<BackscatterDevice> devices; ///< Ordered device list (L >= 1).

    double pathloss_ref = 1e-3;     ///< Linear power gain at 1 m (30 dB loss).
    double pathloss_exponent = 2.7; ///< Distance exponent gamma.
    double clutter_power = 1e-9;    ///< Clutter power sigma_c^2 [W] (-60 dBm).
    double noise_power = 1e-9;      ///< Thermal noise power sigma_z^2 [W] (-60 dBm).
    double symbol_duration = 5e-7;  ///< Symbol interval dt [s].
    int symbols_per_slot = 128;     ///< Symbols per transmission slot N.
    double response_delay = 0.0;    ///< Device response delay tau_0 [s].
    double power_budget = 1.0;      ///< Transmit power budget P_0 [W] (30 dBm).

    /// Clutter-plus-noise power [W]; the denominator of every SNR-type ratio.
    double total_noise() const { return clutter_power + noise_power; }
};

/**
 * @brief Per-device derived geometry and channel.
 */
struct BdGeometry {
    double d_t = 0.0;       ///< Transmitter-to-device distance [m].
    double d_r = 0.0;       ///< Device-to-receiver distance [m].
    double d_0 = 0.0;       ///< Transmitter-to-receiver baseline [m].
    double theta = 0.0;     ///< Direction of departure at the transmitter [rad].
    double phi = 0.0;       ///< Direction of arrival at the receiver [rad].
    double beta = 0.0;      ///< Baseline bearing: direction of rx as seen from tx [rad].
    double tau_t = 0.0;     ///< Forward-hop delay d_t/c [s].
    double tau_r = 0.0;     ///< Return-hop delay d_r/c [s].
    double tau_total = 0.0; ///< Two-hop delay tau_t + response_delay + tau_r [s].
    double alpha = 0.0;     ///< Composite amplitude sqrt(rho * eta(d_t) * eta(d_r)).
    int delay_index = 0;    ///< Nearest integer symbol delay round(tau_total/dt).
    Eigen::MatrixXcd channel; ///< Rank-1 channel H = a_r(phi) a_t(theta)^T (M_r x M_t).
};

/// Result of the closed-form localization inverse.
struct PositionFix {
    double d_r = 0.0;       ///< Recovered device-to-receiver range [m].
    double x = 0.0;         ///< Recovered device x coordinate [m].
    double y = 0.0;         ///< Recovered device y coordinate [m].
    double theta = 0.0;     ///< Implied direction of departure at the transmitter [rad].
};

/**
 * @brief Distance-dependent power gain eta(d) = ref * d^(-exponent).
 *
 * @param d         Distance [m]; must be > 0.
 * @param ref       Linear power gain at 1 m.
 * @param exponent  Path-loss exponent (>= 0).
 * @return Linear power gain (dimensionless).
 * @throws GeometryError if d <= 0 or not finite.
 */
double pathloss(double d, double ref, double exponent);

/**
 * @brief Transmit steering vector of a uniform linear array.
 *
 * Element k (0-based) equals exp(j*2*pi*spacing_ratio*k*sin(theta)); the
 * first element is always 1 and every element has unit modulus.
 *
 * @param theta          Departure angle [rad].
 * @param num_elements   Array size M_t (>= 1).
 * @param spacing_ratio  Element spacing over wavelength.
 * @return Complex vector of length num_elements.
 */
Eigen::VectorXcd steering_tx(double theta, int num_elements, double spacing_ratio = 0.5);

/**
 * @brief Receive steering vector; same phase progression as steering_tx
 *        evaluated at the arrival angle.
 */
Eigen::VectorXcd steering_rx(double phi, int num_elements, double spacing_ratio = 0.5);

/**
 * @brief Checks Scenario invariants (positive powers, durations, array sizes,
 *        symbol ranges, no co-located nodes).
 * @throws ConfigError describing the first violated invariant.
 */
void validate_scenario(const Scenario& scenario);

/**
 * @brief Derives the full per-device geometry and channel for a scenario.
 *
 * Angles use quadrant-aware two-argument arctangents.  The integer delay
 * index is round(tau_total / symbol_duration).
 *
 * @throws GeometryError if any device is co-located with the transmitter or
 *         the receiver, or the baseline is degenerate.
 */
std::vector<BdGeometry> scene_geometry(const Scenario& scenario);

/**
 * @brief Closed-form localization from a delay/angle estimate pair.
 *
 * Intersects the delay ellipse (foci at transmitter and receiver, two-hop
 * path length c*(tau_hat - response_delay)) with the arrival ray at angle
 * phi_hat from the receiver:
 *
 *   d_r = (c^2 tau'^2 - d_0^2) / (2 (d_0 cos(phi_hat - beta) + c tau'))
 *
 * with tau' = tau_hat - response_delay.  The device position follows by
 * walking d_r along the arrival ray, and the implied departure angle by a
 * quadrant-aware arctangent at the transmitter.
 *
 * @param tau_hat  Estimated two-hop delay [s] (including any response delay).
 * @param phi_hat  Estimated arrival angle [rad].
 * @param scenario Scene providing node positions and the response delay.
 * @return Recovered range, position, and departure angle.
 * @throws GeometryError if the denominator is non-positive or the implied
 *         path length c*tau' does not exceed the baseline d_0 (the estimate
 *         is inconsistent with any point on the ellipse branch).
 */
PositionFix locate_bd(double tau_hat, double phi_hat, const Scenario& scenario);

/**
 * @brief Built-in scene presets.
 *
 * "scenario-1": single device; tx at (0,0), rx at (2,-1.5), device at
 * (1.5,-0.5) with symbol 1; 8x8 arrays at half-wavelength spacing; default
 * physics (30 dBm budget, -60 dBm clutter and noise, 30 dB reference loss,
 * exponent 2.7, dt = 5e-7 s, N = 128).
 *
 * "scenario-2": nine devices equally spaced on the boundary of the circle
 * centered at (1.5,-0.5) with radius 0.5, rotated half a step (pi/9) so that
 * no device sits exactly endfire to the receive array (an endfire device has
 * a divergent angle bound and would make the preset unusable for bound and
 * design computations); symbols cycle deterministically through
 * {1/8, 2/8, ..., 1}; same arrays and physics.
 *
 * @param name  "scenario-1" or "scenario-2".
 * @throws ConfigError for unknown preset names.
 */
Scenario preset(std::string_view name);

/**
 * @brief Device ring/disk generator used by preset "scenario-2" and the
 *        configuration loader.
 *
 * Boundary mode places count devices equally spaced on the circle (angle
 * start_angle + 2*pi*k/count from the center).  Disk mode places them on a
 * deterministic sunflower (Vogel) spiral filling the disk, rotated by
 * start_angle.  Symbols cycle through {1/8, ..., 1}.
 *
 * @param center     Circle center [m].
 * @param radius     Circle radius [m] (> 0).
 * @param count      Number of devices (>= 1).
 * @param on_boundary  true: boundary placement; false: disk placement.
 * @param start_angle  Rotation of the whole layout about the center [rad].
 */
std::vector<BackscatterDevice> circle_devices(Position center, double radius,
                                              int count, bool on_boundary = true,
                                              double start_angle = 0.0);

} // namespace bsisac::geometry

#endif // BSISAC_GEOMETRY_HPP

// fim_crb.hpp
// Fisher information blocks and closed-form Cramer-Rao bounds for joint
// delay/DoA estimation of backscatter devices, with independent numeric
// cross-check paths.
//
// SPDX-License-Identifier: MIT
// Copyright (c) 2026 bsisac contributors. See LICENSE for details.

/**
 * @file fim_crb.hpp
 * @brief Fisher information matrix (FIM) assembly and Cramer-Rao bounds.
 *
 * For L devices the unknown vector stacks L two-hop delays and L arrival
 * angles.  Cross-device information vanishes (independent zero-mean
 * excitation symbols), so the 2L x 2L FIM consists of three L x L diagonal
 * blocks.  Each diagonal entry is a pulse constant times a per-device SNR
 * coefficient xi_l times one of three traces of the transmit covariance
 * through the device channel:
 *
 *   f_l = Tr(H_l R H_l^H),  g_l = Tr(H_l R H_l^H L^H),  h_l = Tr(L H_l R H_l^H L^H)
 *
 * with L = diag{0, 1, ..., M_r - 1} the receive-element index matrix.
 *
 * Two bookkeeping conventions for the angle coordinate are implemented and
 * cross-checked:
 *
 *  - kNormalized: the angle column is expressed in per-element phase-slope
 *    units.  Blocks: G_tt = xi*eps_g*msb*f, G_tp = xi*Re[eps_gdot * g],
 *    G_pp = xi*eps_g*h.  Converting the resulting angle variances to
 *    radians^2 multiplies by c_l = 1/(2*pi*spacing_ratio*cos(phi_l))^2.
 *    This is the convention the covariance optimizer's objective uses.
 *
 *  - kPhysical: the angle column is differentiated directly, so the channel
 *    derivative j*kappa_l*L*H_l with kappa_l = 2*pi*spacing_ratio*cos(phi_l)
 *    appears explicitly.  Blocks: G_tt identical, G_tp =
 *    xi*kappa*Im(eps_gdot)*g (exactly zero for real pulses), G_pp =
 *    xi*eps_g*kappa^2*h.  Angle variances come out in radians^2 directly.
 *
 * The conventions coincide in their delay/delay block and, for pulses with
 * purely imaginary eps_gdot, everywhere after c_l conversion; for the real
 * built-in pulses they differ in how delay/angle coupling is counted.  Both
 * are reported and the relative spread is surfaced as a diagnostic
 * (convention_gap) rather than silently absorbed.
 */

#ifndef BSISAC_FIM_CRB_HPP
#define BSISAC_FIM_CRB_HPP

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "bsisac/geometry.hpp"
#include "bsisac/pulses.hpp"

namespace bsisac::fim {

/// Angle-coordinate bookkeeping convention (see file-level discussion).
enum class Convention { kNormalized, kPhysical };

/// The three covariance traces of one device channel.
struct ChannelTraces {
    double f = 0.0;                 ///< Tr(H R H^H), real, >= 0.
    std::complex<double> g{0.0};    ///< Tr(H R H^H L^H).
    double h = 0.0;                 ///< Tr(L H R H^H L^H), real, >= 0.
};

/**
 * @brief Diagonal FIM blocks in both conventions plus the assembled matrices.
 */
struct FimBlocks {
    Eigen::VectorXd xi;         ///< Per-device SNR coefficients xi_l.
    Eigen::VectorXd f, h;       ///< Per-device covariance traces.
    Eigen::VectorXcd g;         ///< Per-device cross traces.
    Eigen::VectorXd kappa;      ///< Angle scale factors 2*pi*spacing*cos(phi_l).
    Eigen::VectorXd c_weight;   ///< Slope-to-radians conversion weights 1/kappa^2.

    Eigen::MatrixXd g_tt;       ///< Delay/delay block (both conventions).
    Eigen::MatrixXd g_tp;       ///< Delay/angle block, normalized convention.
    Eigen::MatrixXd g_pp;       ///< Angle/angle block, normalized convention.
    Eigen::MatrixXd g_tp_physical;
    Eigen::MatrixXd g_pp_physical;

    Eigen::MatrixXd assembled;          ///< 2L x 2L [[G_tt, G_tp],[G_tp^T, G_pp]], normalized.
    Eigen::MatrixXd assembled_physical; ///< Same structure, physical convention.
};

/**
 * @brief Closed-form bounds in both conventions plus numeric cross-checks.
 *
 * Angle bounds are reported in radians^2 in both conventions (the normalized
 * path applies the c_l weights).  The headline scalar `total` is the
 * mixed-unit sum delay_total + doa_total.
 */
struct CrbReport {
    Eigen::VectorXd delay_per_bd;   ///< Seconds^2, normalized convention.
    Eigen::VectorXd doa_per_bd;     ///< Radians^2, normalized convention (c_l applied).
    double delay_total = 0.0;
    double doa_total = 0.0;
    double total = 0.0;

    Eigen::VectorXd delay_per_bd_physical;
    Eigen::VectorXd doa_per_bd_physical;
    double delay_total_physical = 0.0;
    double doa_total_physical = 0.0;
    double total_physical = 0.0;

    double numeric_total = 0.0;          ///< Same-convention dense-inverse total (normalized).
    double numeric_total_physical = 0.0; ///< Dense-inverse total (physical).

    double convention_gap = 0.0;         ///< Max relative spread between convention totals.
    double cross_term_ambiguity = 0.0;   ///< | |e|^2|g|^2 - Re[e g]^2 | / max(.., tiny) over devices.
    bool ill_conditioned = false;        ///< Any numeric path saw condition > 1e12.
};

/// Result of inverting an assembled FIM by independent algorithms.
struct NumericCrb {
    double total_dense = 0.0;           ///< Trace of the pivoted dense inverse.
    Eigen::VectorXd diagonal_dense;     ///< Per-parameter variances, dense path.
    double total_block = 0.0;           ///< Trace via the 2x2-block inversion formula.
    Eigen::VectorXd diagonal_block;     ///< Per-parameter variances, block path
                                        ///< (bottom half via the Woodbury-equivalent
                                        ///< second Schur complement).
    double condition = 0.0;             ///< 2-norm condition estimate.
    bool ill_conditioned = false;       ///< condition > 1e12.
};

/**
 * @brief Per-device SNR coefficients
 *        xi_l = 2 * rho * N * s_l^2 * eta(d_t) * eta(d_r) / (sigma^2 * dt)
 *        with sigma^2 the clutter-plus-noise power.
 *
 * Devices with s_l = 0 receive xi_l = 0; they carry no information and any
 * bound involving them is singular (flagged downstream).
 */
Eigen::VectorXd xi_coefficients(const geometry::Scenario& scenario,
                                const std::vector<geometry::BdGeometry>& geom);

/**
 * @brief The three covariance traces for one device channel.
 *
 * @param covariance  M_t x M_t transmit covariance R (Hermitian PSD).
 * @param channel     M_r x M_t device channel H.
 */
ChannelTraces channel_traces(const Eigen::MatrixXcd& covariance,
                             const Eigen::MatrixXcd& channel);

/**
 * @brief Assembles all FIM blocks (both conventions) for a scenario.
 *
 * @throws NumericalError if the covariance is not Hermitian PSD within
 *         tolerance (1e-12 relative Hermiticity, eigenvalues >= -1e-10*trace).
 */
FimBlocks build_fim(const geometry::Scenario& scenario,
                    const std::vector<geometry::BdGeometry>& geom,
                    const pulses::PulseConstants& pulse,
                    const Eigen::MatrixXcd& covariance);

/**
 * @brief Closed-form per-device bounds from assembled blocks.
 *
 * Normalized convention, per device l (writing e = eps_gdot, E = eps_g,
 * B = msb, and the real cross term re_l = Re[e * g_l]):
 *
 *   crb_delay_l = E h_l / ((E^2 B f_l h_l - re_l^2) xi_l)
 *   crb_doa_l   = c_l * E B f_l / ((E^2 B f_l h_l - re_l^2) xi_l)
 *
 * Physical convention: same formulas with re_l replaced by
 * Im(e) * |g_l|-consistent coupling and kappa_l restored, which for real
 * pulses reduces to the decoupled bounds 1/(xi E B f) and c_l/(xi E h).
 *
 * Numeric totals are NOT filled here (see crb_numeric / crb_report).
 *
 * @throws NumericalError naming the first device whose information
 *         denominator is non-positive (singular information).
 * @throws GeometryError if any cos(phi_l) == 0 (endfire device; the
 *         slope-to-radians weight diverges).
 */
CrbReport crb_closed_form(const FimBlocks& blocks,
                          const pulses::PulseConstants& pulse,
                          const std::vector<geometry::BdGeometry>& geom);

/**
 * @brief Inverts an assembled FIM by two independent algorithms.
 *
 * Dense path: pivoted LU inversion of the full matrix.  Block path: for
 * J = [[A, B],[B^T, D]] with square halves, the top-left inverse block is
 * S^-1 with S = A - B D^-1 B^T and the bottom-right inverse block is
 * computed as (D - B^T A^-1 B)^-1 (the Woodbury-equivalent form of
 * D^-1 + D^-1 B^T S^-1 B D^-1).
 *
 * @param fim  2L x 2L symmetric positive-definite matrix.
 * @throws NumericalError if the matrix is singular (non-invertible pivot or
 *         non-positive Schur complement).
 */
NumericCrb crb_numeric(const Eigen::MatrixXd& fim);

/**
 * @brief One-call convenience: build blocks, evaluate closed forms in both
 *        conventions, run the dense numeric cross-check on both assembled
 *        matrices, and fill every CrbReport field.
 */
CrbReport crb_report(const geometry::Scenario& scenario,
                     const std::vector<geometry::BdGeometry>& geom,
                     const pulses::PulseConstants& pulse,
                     const Eigen::MatrixXcd& covariance);

} // namespace bsisac::fim

#endif // BSISAC_FIM_CRB_HPP

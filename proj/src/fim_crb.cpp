// fim_crb.cpp
// Fisher information blocks, closed-form bounds, and numeric cross-checks.
//
// SPDX-License-Identifier: MIT
// Copyright (c) 2026 bsisac contributors. See LICENSE for details.

#include "bsisac/fim_crb.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "bsisac/errors.hpp"

namespace bsisac::fim {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Entrywise-Hermitian and eigenvalue-floor validation; returns (R + R^H)/2.
Eigen::MatrixXcd checked_covariance(const Eigen::MatrixXcd& covariance)
{
    if (covariance.rows() != covariance.cols()) {
        throw NumericalError("covariance must be square");
    }
    const double scale = std::max(1.0, covariance.cwiseAbs().maxCoeff());
    const double hermiticity =
        (covariance - covariance.adjoint()).cwiseAbs().maxCoeff();
    if (hermiticity > 1e-12 * scale) {
        throw NumericalError("covariance is not Hermitian within tolerance (defect " +
                             std::to_string(hermiticity / scale) + " relative)");
    }
    Eigen::MatrixXcd sym = 0.5 * (covariance + covariance.adjoint());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(sym,
                                                        Eigen::EigenvaluesOnly);
    const double trace = sym.trace().real();
    if (eig.eigenvalues().minCoeff() < -1e-10 * std::max(trace, 1e-300)) {
        throw NumericalError("covariance has a significantly negative eigenvalue");
    }
    return sym;
}

} // namespace

Eigen::VectorXd xi_coefficients(const geometry::Scenario& scenario,
                                const std::vector<geometry::BdGeometry>& geom)
{
    const auto L = static_cast<Eigen::Index>(geom.size());
    Eigen::VectorXd xi(L);
    const double denom = scenario.total_noise() * scenario.symbol_duration;
    for (Eigen::Index l = 0; l < L; ++l) {
        const double s = scenario.devices[static_cast<std::size_t>(l)].symbol;
        // alpha^2 = reflection_fraction * eta(d_t) * eta(d_r), so this equals
        // 2 N s^2 rho eta eta / (sigma^2 dt).
        xi(l) = 2.0 * static_cast<double>(scenario.symbols_per_slot) * s * s *
                geom[static_cast<std::size_t>(l)].alpha *
                geom[static_cast<std::size_t>(l)].alpha / denom;
    }
    return xi;
}

ChannelTraces channel_traces(const Eigen::MatrixXcd& covariance,
                             const Eigen::MatrixXcd& channel)
{
    if (channel.cols() != covariance.rows()) {
        throw NumericalError("channel/covariance dimension mismatch");
    }
    const Eigen::MatrixXcd a = channel * covariance * channel.adjoint();
    ChannelTraces t;
    t.f = a.trace().real();
    std::complex<double> g{0.0, 0.0};
    double h = 0.0;
    for (Eigen::Index m = 0; m < a.rows(); ++m) {
        const double w = static_cast<double>(m);
        g += w * a(m, m);
        h += w * w * a(m, m).real();
    }
    t.g = g;
    t.h = h;
    return t;
}

FimBlocks build_fim(const geometry::Scenario& scenario,
                    const std::vector<geometry::BdGeometry>& geom,
                    const pulses::PulseConstants& pulse,
                    const Eigen::MatrixXcd& covariance)
{
    const Eigen::MatrixXcd r = checked_covariance(covariance);
    const auto L = static_cast<Eigen::Index>(geom.size());

    FimBlocks b;
    b.xi = xi_coefficients(scenario, geom);
    b.f.resize(L);
    b.g.resize(L);
    b.h.resize(L);
    b.kappa.resize(L);
    b.c_weight.resize(L);
    b.g_tt = Eigen::MatrixXd::Zero(L, L);
    b.g_tp = Eigen::MatrixXd::Zero(L, L);
    b.g_pp = Eigen::MatrixXd::Zero(L, L);
    b.g_tp_physical = Eigen::MatrixXd::Zero(L, L);
    b.g_pp_physical = Eigen::MatrixXd::Zero(L, L);

    const double energy = pulse.energy;
    const double msb = pulse.msb;
    const std::complex<double> overlap = pulse.deriv_overlap;

    for (Eigen::Index l = 0; l < L; ++l) {
        const auto& gl = geom[static_cast<std::size_t>(l)];
        const ChannelTraces tr = channel_traces(r, gl.channel);
        b.f(l) = tr.f;
        b.g(l) = tr.g;
        b.h(l) = tr.h;
        const double kappa = kTwoPi * scenario.array.spacing_ratio * std::cos(gl.phi);
        b.kappa(l) = kappa;
        b.c_weight(l) = (kappa != 0.0)
                            ? 1.0 / (kappa * kappa)
                            : std::numeric_limits<double>::infinity();

        // g_l = sum_m m * (H R H^H)[m,m] is real for any PSD covariance (the
        // diagonal of a PSD matrix is real); the complex slot carries it
        // unchanged for generality.
        const double g_real = tr.g.real();
        b.g_tt(l, l) = b.xi(l) * energy * msb * tr.f;
        b.g_tp(l, l) = b.xi(l) * std::real(overlap * tr.g);
        b.g_pp(l, l) = b.xi(l) * energy * tr.h;
        b.g_tp_physical(l, l) = b.xi(l) * kappa * overlap.imag() * g_real;
        b.g_pp_physical(l, l) = b.xi(l) * energy * kappa * kappa * tr.h;
    }

    auto assemble = [L](const Eigen::MatrixXd& tt, const Eigen::MatrixXd& tp,
                        const Eigen::MatrixXd& pp) {
        Eigen::MatrixXd j(2 * L, 2 * L);
        j.topLeftCorner(L, L) = tt;
        j.topRightCorner(L, L) = tp;
        j.bottomLeftCorner(L, L) = tp.transpose();
        j.bottomRightCorner(L, L) = pp;
        return j;
    };
    b.assembled = assemble(b.g_tt, b.g_tp, b.g_pp);
    b.assembled_physical = assemble(b.g_tt, b.g_tp_physical, b.g_pp_physical);
    return b;
}

CrbReport crb_closed_form(const FimBlocks& blocks,
                          const pulses::PulseConstants& pulse,
                          const std::vector<geometry::BdGeometry>& geom)
{
    const auto L = blocks.f.size();
    if (static_cast<Eigen::Index>(geom.size()) != L) {
        throw NumericalError("geometry/block size mismatch");
    }

    CrbReport rep;
    rep.delay_per_bd.resize(L);
    rep.doa_per_bd.resize(L);
    rep.delay_per_bd_physical.resize(L);
    rep.doa_per_bd_physical.resize(L);

    const double energy = pulse.energy;
    const double msb = pulse.msb;
    const std::complex<double> overlap = pulse.deriv_overlap;
    const double overlap_sq = std::norm(overlap);

    double ambiguity = 0.0;
    for (Eigen::Index l = 0; l < L; ++l) {
        if (std::abs(std::cos(geom[static_cast<std::size_t>(l)].phi)) < 1e-12) {
            throw GeometryError("device " + std::to_string(l + 1) +
                                " sits endfire to the receive array (cos(phi)=0); the "
                                "angle bound diverges");
        }
        const double f = blocks.f(l);
        const double h = blocks.h(l);
        const double g_real = blocks.g(l).real();
        const double xi = blocks.xi(l);
        const double cw = blocks.c_weight(l);

        const double cross_norm = std::real(overlap * blocks.g(l));
        const double cross_phys = overlap.imag() * g_real;
        const double info_norm = energy * energy * msb * f * h - cross_norm * cross_norm;
        const double info_phys = energy * energy * msb * f * h - cross_phys * cross_phys;
        if (!(info_norm > 0.0) || !(info_phys > 0.0) || !(xi > 0.0)) {
            throw NumericalError("singular information for device " + std::to_string(l + 1) +
                                 " (zero symbol, zero covariance, or degenerate pulse)");
        }
        rep.delay_per_bd(l) = energy * h / (info_norm * xi);
        rep.doa_per_bd(l) = cw * energy * msb * f / (info_norm * xi);
        rep.delay_per_bd_physical(l) = energy * h / (info_phys * xi);
        rep.doa_per_bd_physical(l) = cw * energy * msb * f / (info_phys * xi);

        const double lit = overlap_sq * std::norm(blocks.g(l));
        ambiguity = std::max(ambiguity, std::abs(lit - cross_norm * cross_norm) /
                                            std::max(lit, 1e-300));
    }
    rep.cross_term_ambiguity = ambiguity;
    rep.delay_total = rep.delay_per_bd.sum();
    rep.doa_total = rep.doa_per_bd.sum();
    rep.total = rep.delay_total + rep.doa_total;
    rep.delay_total_physical = rep.delay_per_bd_physical.sum();
    rep.doa_total_physical = rep.doa_per_bd_physical.sum();
    rep.total_physical = rep.delay_total_physical + rep.doa_total_physical;
    rep.convention_gap = std::abs(rep.total - rep.total_physical) /
                         std::max({rep.total, rep.total_physical, 1e-300});
    return rep;
}

NumericCrb crb_numeric(const Eigen::MatrixXd& fim)
{
    const Eigen::Index n = fim.rows();
    if (fim.cols() != n || n % 2 != 0 || n == 0) {
        throw NumericalError("assembled information matrix must be square with even size");
    }

    NumericCrb out;

    // Delay rows and angle rows carry different physical units, so the raw
    // matrix can span 13+ orders of magnitude between diagonal entries and
    // defeat pivot thresholds even when the underlying problem is benign.
    // Equilibrate with the symmetric Jacobi scaling J_s = S J S,
    // S = diag(1/sqrt(J_ii)): congruence preserves definiteness, the scaled
    // pivots are O(1), and diag(J^-1)_i = S_ii^2 diag(J_s^-1)_i maps back.
    if (!(fim.diagonal().minCoeff() > 0.0)) {
        throw NumericalError("information matrix is singular or indefinite "
                             "(non-positive diagonal entry)");
    }
    const Eigen::VectorXd scale = fim.diagonal().cwiseSqrt().cwiseInverse();
    const Eigen::MatrixXd fs = scale.asDiagonal() * fim * scale.asDiagonal();

    {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (fs + fs.transpose()),
                                                           Eigen::EigenvaluesOnly);
        const double lo = eig.eigenvalues().minCoeff();
        if (!(lo > 0.0)) {
            throw NumericalError("information matrix is singular or indefinite "
                                 "(min scaled eigenvalue " + std::to_string(lo) + ")");
        }
        // Report the condition of the raw matrix; it reflects the spread a
        // caller would face without equilibration.
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> raw(0.5 * (fim + fim.transpose()),
                                                           Eigen::EigenvaluesOnly);
        const double raw_lo = raw.eigenvalues().minCoeff();
        const double raw_hi = raw.eigenvalues().maxCoeff();
        out.condition = raw_lo > 0.0 ? raw_hi / raw_lo
                                     : std::numeric_limits<double>::infinity();
        out.ill_conditioned = !(out.condition <= 1e12);
    }

    // Dense path: pivoted inversion of the equilibrated matrix.
    Eigen::FullPivLU<Eigen::MatrixXd> lu(fs);
    if (!lu.isInvertible()) {
        throw NumericalError("information matrix is numerically singular");
    }
    const Eigen::MatrixXd inv = lu.inverse();
    out.diagonal_dense =
        (scale.array().square() * inv.diagonal().array()).matrix();
    out.total_dense = out.diagonal_dense.sum();

    // Block path: J_s = [[A,B],[B^T,D]]; top-left inverse block is S^-1 with
    // S = A - B D^-1 B^T, bottom-right both via the block formula
    // D^-1 + D^-1 B^T S^-1 B D^-1 and its Woodbury-equivalent
    // (D - B^T A^-1 B)^-1, cross-checked against each other.  The diagonal
    // scaling commutes with the 2x2 block partition, so the structure of the
    // raw matrix carries over unchanged.
    const Eigen::Index half = n / 2;
    const Eigen::MatrixXd a = fs.topLeftCorner(half, half);
    const Eigen::MatrixXd b = fs.topRightCorner(half, half);
    const Eigen::MatrixXd d = fs.bottomRightCorner(half, half);
    const Eigen::MatrixXd d_inv = d.llt().solve(Eigen::MatrixXd::Identity(half, half));
    const Eigen::MatrixXd a_inv = a.llt().solve(Eigen::MatrixXd::Identity(half, half));
    const Eigen::MatrixXd schur_top = a - b * d_inv * b.transpose();
    const Eigen::MatrixXd schur_bottom = d - b.transpose() * a_inv * b;
    Eigen::LLT<Eigen::MatrixXd> top_llt(schur_top);
    Eigen::LLT<Eigen::MatrixXd> bottom_llt(schur_bottom);
    if (top_llt.info() != Eigen::Success || bottom_llt.info() != Eigen::Success) {
        throw NumericalError("a Schur complement of the information matrix is not "
                             "positive definite");
    }
    const Eigen::MatrixXd top_inv =
        top_llt.solve(Eigen::MatrixXd::Identity(half, half));
    const Eigen::MatrixXd bottom_inv_woodbury =
        bottom_llt.solve(Eigen::MatrixXd::Identity(half, half));
    const Eigen::MatrixXd bottom_inv_block =
        d_inv + d_inv * b.transpose() * top_inv * b * d_inv;
    const double path_gap =
        (bottom_inv_block - bottom_inv_woodbury).cwiseAbs().maxCoeff() /
        std::max(bottom_inv_woodbury.cwiseAbs().maxCoeff(), 1e-300);
    if (path_gap > 1e-6) {
        throw NumericalError("block-inverse and Woodbury paths disagree (" +
                             std::to_string(path_gap) + " relative); matrix is "
                             "too ill-conditioned to trust");
    }

    out.diagonal_block.resize(n);
    out.diagonal_block.head(half) =
        (scale.head(half).array().square() * top_inv.diagonal().array()).matrix();
    out.diagonal_block.tail(half) =
        (scale.tail(half).array().square() *
         bottom_inv_woodbury.diagonal().array()).matrix();
    out.total_block = out.diagonal_block.sum();
    return out;
}

CrbReport crb_report(const geometry::Scenario& scenario,
                     const std::vector<geometry::BdGeometry>& geom,
                     const pulses::PulseConstants& pulse,
                     const Eigen::MatrixXcd& covariance)
{
    const FimBlocks blocks = build_fim(scenario, geom, pulse, covariance);
    CrbReport rep = crb_closed_form(blocks, pulse, geom);

    const auto L = blocks.f.size();
    const NumericCrb num = crb_numeric(blocks.assembled);
    const NumericCrb num_phys = crb_numeric(blocks.assembled_physical);
    // The normalized assembled matrix expresses angles in per-element phase
    // slope; its inverse diagonal needs the c_l weights to land in radians^2.
    double total = 0.0;
    double total_phys = 0.0;
    for (Eigen::Index l = 0; l < L; ++l) {
        total += num.diagonal_dense(l) + blocks.c_weight(l) * num.diagonal_dense(L + l);
        total_phys += num_phys.diagonal_dense(l) + num_phys.diagonal_dense(L + l);
    }
    rep.numeric_total = total;
    rep.numeric_total_physical = total_phys;
    rep.ill_conditioned = num.ill_conditioned || num_phys.ill_conditioned;
    return rep;
}

} // namespace bsisac::fim

// rate.cpp
// Communication sum-rate, its derivatives, and the waveform-level cross-check.
//
// SPDX-License-Identifier: MIT
// Copyright (c) 2026 bsisac contributors. See LICENSE for details.

#include "bsisac/rate.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "bsisac/errors.hpp"

namespace bsisac::rate {

namespace {

/// log2 det(I + c*M) of a Hermitian PSD matrix via its eigenvalues; slightly
/// negative eigenvalues from roundoff are clamped to zero, anything beyond
/// the tolerance is rejected.
double log2_det_shifted(const Eigen::MatrixXcd& m, double c)
{
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(
        0.5 * (m + m.adjoint()), Eigen::EigenvaluesOnly);
    const double trace = m.trace().real();
    const double floor = -1e-10 * std::max(trace, 1e-300);
    double acc = 0.0;
    for (Eigen::Index i = 0; i < eig.eigenvalues().size(); ++i) {
        const double lambda = eig.eigenvalues()(i);
        if (lambda < floor) {
            throw NumericalError("interference matrix has a negative eigenvalue (" +
                                 std::to_string(lambda) + ")");
        }
        acc += std::log1p(c * std::max(lambda, 0.0));
    }
    return acc / std::numbers::ln2_v<double>;
}

} // namespace

Eigen::MatrixXcd build_rate_matrix(const geometry::Scenario& scenario,
                                   const std::vector<geometry::BdGeometry>& geom,
                                   const Eigen::MatrixXcd& covariance)
{
    const auto L = static_cast<Eigen::Index>(geom.size());
    const Eigen::MatrixXcd r = 0.5 * (covariance + covariance.adjoint());

    std::vector<Eigen::MatrixXcd> scaled(static_cast<std::size_t>(L));
    for (Eigen::Index l = 0; l < L; ++l) {
        const auto& gl = geom[static_cast<std::size_t>(l)];
        const double w = scenario.devices[static_cast<std::size_t>(l)].symbol * gl.alpha;
        scaled[static_cast<std::size_t>(l)] = w * gl.channel;
    }

    Eigen::MatrixXcd f(L, L);
    for (Eigen::Index j = 0; j < L; ++j) {
        const Eigen::MatrixXcd t = scaled[static_cast<std::size_t>(j)] * r;
        for (Eigen::Index i = 0; i < L; ++i) {
            // Tr(H_j R H_i^H) as an elementwise contraction.
            f(i, j) = (t.cwiseProduct(scaled[static_cast<std::size_t>(i)].conjugate()))
                          .sum();
        }
    }
    return 0.5 * (f + f.adjoint());
}

double sum_rate(const geometry::Scenario& scenario, const Eigen::MatrixXcd& rate_matrix)
{
    const double n = static_cast<double>(scenario.symbols_per_slot);
    const double c = n / scenario.total_noise();
    return log2_det_shifted(rate_matrix, c) / n;
}

double sum_rate(const geometry::Scenario& scenario,
                const std::vector<geometry::BdGeometry>& geom,
                const Eigen::MatrixXcd& covariance)
{
    return sum_rate(scenario, build_rate_matrix(scenario, geom, covariance));
}

Eigen::MatrixXcd sum_rate_gradient(const geometry::Scenario& scenario,
                                   const std::vector<geometry::BdGeometry>& geom,
                                   const Eigen::MatrixXcd& covariance)
{
    const auto L = static_cast<Eigen::Index>(geom.size());
    const auto mt = static_cast<Eigen::Index>(scenario.array.num_tx);
    const double n = static_cast<double>(scenario.symbols_per_slot);
    const double c = n / scenario.total_noise();

    const Eigen::MatrixXcd f = build_rate_matrix(scenario, geom, covariance);
    const Eigen::MatrixXcd k =
        (Eigen::MatrixXcd::Identity(L, L) + c * f)
            .llt()
            .solve(Eigen::MatrixXcd::Identity(L, L));

    Eigen::MatrixXcd grad = Eigen::MatrixXcd::Zero(mt, mt);
    for (Eigen::Index i = 0; i < L; ++i) {
        const auto& gi = geom[static_cast<std::size_t>(i)];
        const double wi = scenario.devices[static_cast<std::size_t>(i)].symbol * gi.alpha;
        for (Eigen::Index j = 0; j < L; ++j) {
            const auto& gj = geom[static_cast<std::size_t>(j)];
            const double wj =
                scenario.devices[static_cast<std::size_t>(j)].symbol * gj.alpha;
            grad += (k(j, i) * wi * wj) * (gi.channel.adjoint() * gj.channel);
        }
    }
    grad *= c / (n * std::numbers::ln2_v<double>);
    return 0.5 * (grad + grad.adjoint());
}

WaveformRate sum_rate_from_waveform(const geometry::Scenario& scenario,
                                    const std::vector<geometry::BdGeometry>& geom,
                                    const Eigen::MatrixXcd& symbol_block)
{
    const auto L = static_cast<Eigen::Index>(geom.size());
    const auto mr = static_cast<Eigen::Index>(scenario.array.num_rx);
    const Eigen::Index n_sym = symbol_block.cols();
    if (symbol_block.rows() != static_cast<Eigen::Index>(scenario.array.num_tx)) {
        throw NumericalError("symbol block row count must equal the transmit "
                             "array size");
    }

    Eigen::MatrixXcd w(mr * n_sym, L);
    for (Eigen::Index l = 0; l < L; ++l) {
        const auto& gl = geom[static_cast<std::size_t>(l)];
        const double s = scenario.devices[static_cast<std::size_t>(l)].symbol * gl.alpha;
        const Eigen::MatrixXcd y = s * (gl.channel * symbol_block);
        w.col(l) = Eigen::Map<const Eigen::VectorXcd>(y.data(), y.size());
    }

    const double n = static_cast<double>(scenario.symbols_per_slot);
    const double inv_noise = 1.0 / scenario.total_noise();
    WaveformRate out;
    out.small_form = log2_det_shifted(w.adjoint() * w, inv_noise) / n;
    out.big_form = log2_det_shifted(w * w.adjoint(), inv_noise) / n;
    return out;
}

} // namespace bsisac::rate

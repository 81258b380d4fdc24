// simulate.cpp
// Waveform synthesis, derivative-correlation validation, and the ML
// estimator-vs-bound experiment.
//
// SPDX-License-Identifier: MIT
// Copyright (c) 2026 bsisac contributors. See LICENSE for details.

#include "bsisac/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <string>

#include "bsisac/errors.hpp"

namespace bsisac::sim {

namespace {

using Eigen::Index;
using Eigen::MatrixXcd;
using Eigen::VectorXcd;
using std::complex;

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Unit-variance circularly-symmetric complex Gaussian stream with a fixed,
/// implementation-independent mapping from engine words to variates
/// (std::normal_distribution is not pinned across standard libraries).
class CnStream {
public:
    explicit CnStream(std::uint64_t seed) : eng_(seed) {}

    double uniform01()
    {
        // 53 mantissa bits, offset to the open interval (0, 1).
        return (static_cast<double>(eng_() >> 11) + 0.5) * 0x1.0p-53;
    }

    complex<double> next()
    {
        // |z|^2 ~ Exp(1) and uniform phase give E|z|^2 = 1.
        const double radius = std::sqrt(-std::log(uniform01()));
        const double angle = 2.0 * std::numbers::pi * uniform01();
        return {radius * std::cos(angle), radius * std::sin(angle)};
    }

private:
    std::mt19937_64 eng_;
};

/// Fine-grid pulse table g((j + 0.5) * dt / os) for j = 0..os-1.
Eigen::VectorXd pulse_table(const pulses::PulseShape& pulse, double dt, int os)
{
    Eigen::VectorXd g(os);
    const double step = dt / os;
    for (int j = 0; j < os; ++j) {
        g(j) = pulses::eval_pulse(pulse, (j + 0.5) * step, dt);
    }
    return g;
}

/// Fine-grid pulse-derivative table, per symbol segment: central differences
/// in the segment interior, second-order one-sided stencils at the first and
/// last fine sample of the segment.  The waveform restricted to one symbol
/// interval is x_n * g(t - n dt), so differencing the pulse table is exactly
/// per-segment differencing of the waveform and never crosses the
/// discontinuities at symbol boundaries (all supported pulses have
/// g(0) != g(dt-)).
Eigen::VectorXd derivative_table(const pulses::PulseShape& pulse, double dt, int os,
                                 bool analytic)
{
    const double step = dt / os;
    Eigen::VectorXd dg(os);
    if (analytic) {
        for (int j = 0; j < os; ++j) {
            dg(j) = pulses::eval_pulse_derivative(pulse, (j + 0.5) * step, dt);
        }
        return dg;
    }
    if (os < 4) {
        throw ConfigError("finite-difference derivative tables need oversampling >= 4");
    }
    const Eigen::VectorXd g = pulse_table(pulse, dt, os);
    for (int j = 1; j + 1 < os; ++j) {
        dg(j) = (g(j + 1) - g(j - 1)) / (2.0 * step);
    }
    dg(0) = (-3.0 * g(0) + 4.0 * g(1) - g(2)) / (2.0 * step);
    dg(os - 1) = (3.0 * g(os - 1) - 4.0 * g(os - 2) + g(os - 3)) / (2.0 * step);
    return dg;
}

std::vector<long> quantized_delays(const geometry::Scenario& scenario,
                                   const std::vector<geometry::BdGeometry>& geom,
                                   int oversampling,
                                   const std::optional<std::vector<double>>& delay_override)
{
    const double fine = scenario.symbol_duration / oversampling;
    if (delay_override && delay_override->size() != geom.size()) {
        throw ConfigError("delay_override must provide one delay per device");
    }
    std::vector<long> k(geom.size());
    for (std::size_t l = 0; l < geom.size(); ++l) {
        const double tau = delay_override ? (*delay_override)[l] : geom[l].tau_total;
        if (tau < 0.0) {
            throw ConfigError("negative delay for device " + std::to_string(l + 1));
        }
        k[l] = std::lround(tau / fine);
    }
    return k;
}

} // namespace

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index)
{
    return splitmix64(master + 0x9E3779B97F4A7C15ULL * (index + 1));
}

Eigen::MatrixXcd sample_excitation(const Eigen::MatrixXcd& covariance, int n_symbols,
                                   std::uint64_t seed)
{
    if (covariance.rows() != covariance.cols() || covariance.rows() < 1) {
        throw ConfigError("excitation covariance must be square and non-empty");
    }
    if (n_symbols < 1) {
        throw ConfigError("need at least one symbol");
    }
    const Index mt = covariance.rows();
    Eigen::SelfAdjointEigenSolver<MatrixXcd> eig(
        0.5 * (covariance + covariance.adjoint()));
    // Eigenvalues below numerical rank (relative to the largest) are treated
    // as exact zeros; flooring them at 0 alone would still leak sqrt(eps)
    // amplitudes into the null space of rank-deficient covariances.
    const double floor = 1e-14 * std::max(eig.eigenvalues().cwiseAbs().maxCoeff(),
                                          std::numeric_limits<double>::min());
    Eigen::VectorXd root =
        (eig.eigenvalues().array() > floor)
            .select(eig.eigenvalues().cwiseMax(0.0), 0.0)
            .cwiseSqrt();
    const MatrixXcd factor = eig.eigenvectors() * root.asDiagonal();

    CnStream rng(seed);
    MatrixXcd z(mt, n_symbols);
    for (Index n = 0; n < n_symbols; ++n) {
        for (Index r = 0; r < mt; ++r) {
            z(r, n) = rng.next();
        }
    }
    return factor * z;
}

Eigen::MatrixXcd synthesize_received(const geometry::Scenario& scenario,
                                     const std::vector<geometry::BdGeometry>& geom,
                                     const Eigen::MatrixXcd& excitation,
                                     const pulses::PulseShape& pulse,
                                     int oversampling, std::uint64_t seed,
                                     bool with_noise,
                                     const std::optional<std::vector<double>>& delay_override)
{
    if (oversampling < 1) {
        throw ConfigError("oversampling must be >= 1");
    }
    const Index mt = static_cast<Index>(scenario.array.num_tx);
    const Index mr = static_cast<Index>(scenario.array.num_rx);
    const Index n_sym = excitation.cols();
    if (excitation.rows() != mt) {
        throw ConfigError("excitation row count must equal the transmit array size");
    }

    const std::vector<long> k = quantized_delays(scenario, geom, oversampling,
                                                 delay_override);
    long kmax = 0;
    for (long kl : k) kmax = std::max(kmax, kl);
    const long os = oversampling;
    const long delay_syms = (kmax + os - 1) / os;
    const Index n_fine = static_cast<Index>((n_sym + delay_syms + 1) * os);

    const Eigen::VectorXd gtab = pulse_table(pulse, scenario.symbol_duration,
                                             oversampling);
    MatrixXcd y = MatrixXcd::Zero(mr, n_fine);
    for (std::size_t l = 0; l < geom.size(); ++l) {
        const double w = scenario.devices[l].symbol * geom[l].alpha;
        const MatrixXcd shaped = w * (geom[l].channel * excitation);  // mr x n_sym
        for (Index n = 0; n < n_sym; ++n) {
            const Index base = static_cast<Index>(k[l]) + n * os;
            for (long j = 0; j < os; ++j) {
                y.col(base + j) += shaped.col(n) * gtab(j);
            }
        }
    }

    if (with_noise) {
        const double scale =
            std::sqrt(scenario.total_noise() * static_cast<double>(oversampling));
        CnStream rng(seed);
        for (Index m = 0; m < n_fine; ++m) {
            for (Index r = 0; r < mr; ++r) {
                y(r, m) += scale * rng.next();
            }
        }
    }
    return y;
}

CorrelationReport validate_lemma1(const geometry::Scenario& scenario,
                                  const std::vector<geometry::BdGeometry>& geom,
                                  const pulses::PulseShape& pulse,
                                  const Eigen::MatrixXcd& covariance,
                                  int p, int q, int trials, std::uint64_t seed,
                                  int oversampling,
                                  const std::optional<std::vector<double>>& delay_override,
                                  bool analytic_derivative)
{
    if (trials < 1000) {
        throw ConfigError("derivative-correlation validation needs >= 1000 trials");
    }
    const auto L = static_cast<int>(geom.size());
    if (p < 0 || q < 0 || p >= L || q >= L) {
        throw ConfigError("device index out of range");
    }
    const double dt = scenario.symbol_duration;
    const int os = oversampling;
    if (p != q) {
        const double tau_p = delay_override ? (*delay_override)[static_cast<std::size_t>(p)]
                                            : geom[static_cast<std::size_t>(p)].tau_total;
        const double tau_q = delay_override ? (*delay_override)[static_cast<std::size_t>(q)]
                                            : geom[static_cast<std::size_t>(q)].tau_total;
        const double ratio = (tau_p - tau_q) / dt;
        if (std::abs(ratio - std::round(ratio)) > 1e-9 * std::max(1.0, std::abs(ratio))) {
            throw ConfigError("cross-device validation requires delays separated by "
                              "an integer number of symbol intervals");
        }
    }

    const std::vector<long> k = quantized_delays(scenario, geom, os, delay_override);
    const Eigen::VectorXd dgtab = derivative_table(pulse, dt, os, analytic_derivative);
    const Index n = static_cast<Index>(scenario.symbols_per_slot);
    long kmax = std::max(k[static_cast<std::size_t>(p)], k[static_cast<std::size_t>(q)]);
    const Index n_fine = n * os + static_cast<Index>(kmax);

    // Steering split of the rank-1 channels: the correlation reduces to
    // (a_rp^H a_rq) * sum_m conj(a_tp^T xdot_p[m]) (a_tq^T xdot_q[m]).
    const Eigen::VectorXcd ar_p =
        geometry::steering_rx(geom[static_cast<std::size_t>(p)].phi,
                              scenario.array.num_rx, scenario.array.spacing_ratio);
    const Eigen::VectorXcd ar_q =
        geometry::steering_rx(geom[static_cast<std::size_t>(q)].phi,
                              scenario.array.num_rx, scenario.array.spacing_ratio);
    const complex<double> rx_gain = ar_p.dot(ar_q);  // conjugates the left factor
    const Eigen::VectorXcd at_p =
        geometry::steering_tx(geom[static_cast<std::size_t>(p)].theta,
                              scenario.array.num_tx, scenario.array.spacing_ratio);
    const Eigen::VectorXcd at_q =
        geometry::steering_tx(geom[static_cast<std::size_t>(q)].theta,
                              scenario.array.num_tx, scenario.array.spacing_ratio);

    const long kp = k[static_cast<std::size_t>(p)];
    const long kq = k[static_cast<std::size_t>(q)];

    double mean = 0.0;
    double m2 = 0.0;
    for (int trial = 0; trial < trials; ++trial) {
        const MatrixXcd x =
            sample_excitation(covariance, static_cast<int>(n),
                              derive_seed(seed, static_cast<std::uint64_t>(trial)));
        const Eigen::RowVectorXcd wp = at_p.transpose() * x;
        const Eigen::RowVectorXcd wq = at_q.transpose() * x;
        complex<double> acc{0.0, 0.0};
        for (Index m = 0; m < n_fine; ++m) {
            const long mp = static_cast<long>(m) - kp;
            const long mq = static_cast<long>(m) - kq;
            if (mp < 0 || mq < 0) continue;
            const Index np = static_cast<Index>(mp / os);
            const Index nq = static_cast<Index>(mq / os);
            if (np >= n || nq >= n) continue;
            const complex<double> vp = wp(np) * dgtab(mp % os);
            const complex<double> vq = wq(nq) * dgtab(mq % os);
            acc += std::conj(vp) * vq;
        }
        const double value =
            dt * dt / static_cast<double>(os) * std::real(rx_gain * acc);
        const double delta = value - mean;
        mean += delta / static_cast<double>(trial + 1);
        m2 += delta * (value - mean);
    }

    CorrelationReport rep;
    rep.p = p;
    rep.q = q;
    rep.trials = trials;
    rep.oversampling = os;
    rep.empirical = mean;
    rep.standard_error =
        std::sqrt(m2 / (static_cast<double>(trials) - 1.0) / static_cast<double>(trials));
    if (p == q) {
        const fim::ChannelTraces tr = fim::channel_traces(
            0.5 * (covariance + covariance.adjoint()),
            geom[static_cast<std::size_t>(p)].channel);
        // eps_g * msb = integral of the squared pulse derivative.
        pulses::PulseConstants pc = pulses::pulse_constants(pulse, dt);
        rep.predicted = pc.energy * pc.msb * static_cast<double>(n) * dt * tr.f;
        rep.ratio = rep.empirical / rep.predicted;
    }
    return rep;
}

std::pair<double, double> ml_estimate_single_bd(const Eigen::MatrixXcd& received,
                                                const geometry::Scenario& scenario,
                                                const std::vector<geometry::BdGeometry>& geom,
                                                const Eigen::MatrixXcd& excitation,
                                                const pulses::PulseShape& pulse,
                                                int oversampling,
                                                const std::vector<double>& delay_grid,
                                                const std::vector<double>& doa_grid)
{
    if (geom.size() != 1) {
        throw ConfigError("the grid-search estimator handles exactly one device");
    }
    if (delay_grid.empty() || doa_grid.empty()) {
        throw ConfigError("delay and DoA grids must be non-empty");
    }
    if (oversampling < 1) {
        throw ConfigError("oversampling must be >= 1");
    }
    const double dt = scenario.symbol_duration;
    const double fine = dt / oversampling;
    const Index n_sym = excitation.cols();
    const long os = oversampling;

    const Eigen::VectorXd gtab = pulse_table(pulse, dt, oversampling);
    const double pulse_sq = gtab.squaredNorm();
    const Eigen::VectorXcd at = geometry::steering_tx(
        geom[0].theta, scenario.array.num_tx, scenario.array.spacing_ratio);
    const Eigen::RowVectorXcd w = at.transpose() * excitation;
    const double sym_sq = w.squaredNorm();
    const double template_sq = sym_sq * pulse_sq;
    if (!(template_sq > 0.0)) {
        throw NumericalError("excitation projects to zero on the device path; "
                             "the estimator criterion is degenerate");
    }

    const Index mr = received.rows();
    Eigen::MatrixXcd steer(mr, static_cast<Index>(doa_grid.size()));
    for (std::size_t i = 0; i < doa_grid.size(); ++i) {
        steer.col(static_cast<Index>(i)) = geometry::steering_rx(
            doa_grid[i], scenario.array.num_rx, scenario.array.spacing_ratio);
    }

    double best = -1.0;
    double best_tau = delay_grid.front();
    double best_phi = doa_grid.front();
    for (double tau : delay_grid) {
        const long shift = std::lround(tau / fine);
        if (std::abs(tau - static_cast<double>(shift) * fine) > 1e-6 * fine ||
            shift < 0) {
            throw ConfigError("delay hypotheses must be non-negative integer "
                              "multiples of the fine-grid step");
        }
        if (static_cast<Index>(shift) + n_sym * os > received.cols()) {
            throw ConfigError("delay hypothesis exceeds the received block");
        }
        // z = sum_m y[m] * conj(template[m]); template[m] = w_n * g_j.
        VectorXcd z = VectorXcd::Zero(mr);
        for (Index n = 0; n < n_sym; ++n) {
            const Index base = static_cast<Index>(shift) + n * os;
            VectorXcd filtered = VectorXcd::Zero(mr);
            for (long j = 0; j < os; ++j) {
                filtered += received.col(base + j) * gtab(j);
            }
            z += filtered * std::conj(w(n));
        }
        const Eigen::VectorXcd projected = steer.adjoint() * z;
        for (Index i = 0; i < projected.size(); ++i) {
            const double score = std::norm(projected(i)) / template_sq;
            if (score > best) {
                best = score;
                best_tau = tau;
                best_phi = doa_grid[static_cast<std::size_t>(i)];
            }
        }
    }
    return {best_tau, best_phi};
}

MseReport mse_vs_crb(const geometry::Scenario& scenario, const pulses::PulseShape& pulse,
                     const SimulationRun& run)
{
    if (scenario.devices.size() != 1) {
        throw ConfigError("the estimator-vs-bound experiment needs exactly one device");
    }
    if (run.trials < 1) {
        throw ConfigError("need at least one trial");
    }
    if (!(run.power_scale > 0.0)) {
        throw ConfigError("power_scale must be positive");
    }
    const double dt = scenario.symbol_duration;
    const double fine = run.delay_grid > 0.0 ? run.delay_grid : dt / 16.0;
    const int os = static_cast<int>(std::lround(dt / fine));
    if (os < 1 || std::abs(dt - os * fine) > 1e-9 * dt) {
        throw ConfigError("the delay grid step must divide the symbol duration");
    }

    const auto geom = geometry::scene_geometry(scenario);
    const Index mt = static_cast<Index>(scenario.array.num_tx);
    const MatrixXcd cov = (run.power_scale * scenario.power_budget /
                           static_cast<double>(mt)) *
                          MatrixXcd::Identity(mt, mt);
    const pulses::PulseConstants pc = pulses::pulse_constants(pulse, dt);
    const fim::CrbReport crb = fim::crb_report(scenario, geom, pc, cov);

    MseReport rep;
    rep.trials = run.trials;
    rep.power_scale = run.power_scale;
    rep.seed = run.seed;
    rep.crb_delay = crb.delay_per_bd(0);
    rep.crb_doa = crb.doa_per_bd(0);
    rep.crb_delay_physical = crb.delay_per_bd_physical(0);
    rep.crb_doa_physical = crb.doa_per_bd_physical(0);

    const double tau_true = geom[0].tau_total;
    const long k_true = std::lround(tau_true / fine);
    const double tau_q = static_cast<double>(k_true) * fine;
    const double phi_true = geom[0].phi;

    std::vector<double> delay_grid;
    for (long k = std::max<long>(0, k_true - os); k <= k_true + os; ++k) {
        delay_grid.push_back(static_cast<double>(k) * fine);
    }
    const double step = run.doa_grid > 0.0 ? run.doa_grid
                                           : std::sqrt(rep.crb_doa_physical) / 10.0;
    const double half_width = 8.0 * std::sqrt(10.0 * rep.crb_doa_physical);
    const long n_side = std::lround(std::ceil(half_width / step));
    std::vector<double> doa_grid;
    doa_grid.reserve(static_cast<std::size_t>(2 * n_side + 1));
    for (long i = -n_side; i <= n_side; ++i) {
        doa_grid.push_back(phi_true + static_cast<double>(i) * step);
    }

    const int n_sym = scenario.symbols_per_slot;
    double se_tau = 0.0, se_phi = 0.0, b_tau = 0.0, b_phi = 0.0;
    for (int trial = 0; trial < run.trials; ++trial) {
        const std::uint64_t sx =
            derive_seed(run.seed, 2 * static_cast<std::uint64_t>(trial));
        const std::uint64_t sn =
            derive_seed(run.seed, 2 * static_cast<std::uint64_t>(trial) + 1);
        const MatrixXcd x = sample_excitation(cov, n_sym, sx);
        const MatrixXcd y = synthesize_received(scenario, geom, x, pulse, os, sn,
                                                run.with_noise);
        const auto [tau_hat, phi_hat] = ml_estimate_single_bd(
            y, scenario, geom, x, pulse, os, delay_grid, doa_grid);
        const double d_tau = tau_hat - tau_q;
        const double d_phi = phi_hat - phi_true;
        se_tau += d_tau * d_tau;
        se_phi += d_phi * d_phi;
        b_tau += d_tau;
        b_phi += d_phi;
    }
    const double inv = 1.0 / static_cast<double>(run.trials);
    rep.mse_delay = se_tau * inv;
    rep.mse_doa = se_phi * inv;
    rep.bias_delay = b_tau * inv;
    rep.bias_doa = b_phi * inv;
    rep.ratio_doa_physical = rep.mse_doa / rep.crb_doa_physical;
    return rep;
}

} // namespace bsisac::sim

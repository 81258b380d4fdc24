// test_simulate.cpp
// Monte-Carlo engine: seeding, excitation sampling, waveform synthesis,
// the derivative-correlation check, and the estimator-vs-bound experiment.
//
// SPDX-License-Identifier: MIT
// Copyright (c) 2026 bsisac contributors. See LICENSE for details.

#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <set>

#include "bsisac/errors.hpp"
#include "bsisac/geometry.hpp"
#include "bsisac/pulses.hpp"
#include "bsisac/simulate.hpp"

using namespace bsisac;
using namespace bsisac::sim;

namespace {

geometry::Scenario scene1() { return geometry::preset("scenario-1"); }

Eigen::MatrixXcd iso_cov(const geometry::Scenario& sc)
{
    const int mt = sc.array.num_tx;
    return Eigen::MatrixXcd::Identity(mt, mt) * (sc.power_budget / mt);
}

} // namespace

TEST_CASE("per-trial seed derivation is deterministic and collision-free")
{
    CHECK(derive_seed(42, 0) == derive_seed(42, 0));
    std::set<std::uint64_t> seen;
    for (std::uint64_t i = 0; i < 1000; ++i) seen.insert(derive_seed(42, i));
    CHECK(seen.size() == 1000);
    CHECK(derive_seed(42, 0) != derive_seed(43, 0));
}

TEST_CASE("excitation sampling reproduces the requested covariance")
{
    std::mt19937_64 sd(5u);
    Eigen::MatrixXcd a(4, 4);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) a(i, j) = {gauss(sd), gauss(sd)};
    const Eigen::MatrixXcd cov = a * a.adjoint() / 4.0;

    const int n = 20000;
    const auto x = sample_excitation(cov, n, 101);
    REQUIRE(x.rows() == 4);
    REQUIRE(x.cols() == n);
    const Eigen::MatrixXcd emp = x * x.adjoint() / static_cast<double>(n);
    CHECK((emp - cov).norm() < 0.05 * cov.norm());

    // Identical seeds reproduce bitwise; different seeds do not.
    CHECK((sample_excitation(cov, 16, 101) - x.leftCols(16)).norm() == 0.0);
    CHECK((sample_excitation(cov, 16, 102) - x.leftCols(16)).norm() != 0.0);
}

TEST_CASE("rank-deficient covariances sample on the correct subspace")
{
    Eigen::VectorXcd u(3);
    u << 1.0, std::complex<double>(0.0, 1.0), -1.0;
    const Eigen::MatrixXcd cov = u * u.adjoint(); // rank 1
    const auto x = sample_excitation(cov, 500, 7);
    // Every column must be proportional to u.
    for (int j = 0; j < x.cols(); ++j) {
        const Eigen::VectorXcd col = x.col(j);
        const Eigen::VectorXcd residual =
            col - u * (u.dot(col) / u.squaredNorm());
        CHECK(residual.norm() < 1e-10 * (1.0 + col.norm()));
    }
}

TEST_CASE("noiseless synthesis reproduces the shaped, delayed contribution")
{
    const auto sc = scene1();
    const auto geom = geometry::scene_geometry(sc);
    const auto pulse = pulses::make_pulse("g1");
    const int os = 8;
    const double fine = sc.symbol_duration / os;
    const int n = sc.symbols_per_slot;

    const auto x = sample_excitation(iso_cov(sc), n, 11);
    const auto y = synthesize_received(sc, geom, x, pulse, os, 1, false);
    REQUIRE(y.rows() == sc.array.num_rx);
    REQUIRE(y.cols() == (n + 1) * os); // meter-scale delay quantizes to zero

    const double w = sc.devices[0].symbol * geom[0].alpha;
    const Eigen::MatrixXcd hx = geom[0].channel * x;
    for (int sym : {0, 5, n - 1}) {
        for (int j = 0; j < os; ++j) {
            const double gj =
                pulses::eval_pulse(pulse, (j + 0.5) * fine, sc.symbol_duration);
            const Eigen::VectorXcd expect = w * gj * hx.col(sym);
            CHECK((y.col(sym * os + j) - expect).norm() <
                  1e-12 * (1.0 + expect.norm()));
        }
    }
    // Tail interval beyond the slot is empty without noise.
    CHECK(y.rightCols(os).norm() == 0.0);
}

TEST_CASE("delay overrides shift the contribution by whole fine samples")
{
    const auto sc = scene1();
    const auto geom = geometry::scene_geometry(sc);
    const auto pulse = pulses::make_pulse("g1");
    const int os = 8;
    const double dt = sc.symbol_duration;

    const auto x = sample_excitation(iso_cov(sc), sc.symbols_per_slot, 13);
    const auto base = synthesize_received(sc, geom, x, pulse, os, 1, false,
                                          std::vector<double>{0.0});
    const auto shifted = synthesize_received(sc, geom, x, pulse, os, 1, false,
                                             std::vector<double>{dt});
    REQUIRE(shifted.cols() == base.cols() + os);
    CHECK(shifted.leftCols(os).norm() == 0.0);
    CHECK((shifted.middleCols(os, base.cols()) - base).norm() == 0.0);

    CHECK_THROWS_AS(synthesize_received(sc, geom, x, pulse, os, 1, false,
                                        std::vector<double>{-1e-9}),
                    ConfigError);
    CHECK_THROWS_AS(synthesize_received(sc, geom, x, pulse, 0, 1, false),
                    ConfigError);
}

TEST_CASE("receiver noise carries the oversampling-compensated variance")
{
    const auto sc = scene1();
    const auto geom = geometry::scene_geometry(sc);
    const auto pulse = pulses::make_pulse("g1");
    const int os = 8;
    const Eigen::MatrixXcd x =
        Eigen::MatrixXcd::Zero(sc.array.num_tx, sc.symbols_per_slot);

    const auto y = synthesize_received(sc, geom, x, pulse, os, 77, true);
    const double target = sc.total_noise() * os;
    const double emp = y.cwiseAbs2().mean();
    CHECK(emp == doctest::Approx(target).epsilon(0.1));

    // Reproducible per seed.
    const auto y2 = synthesize_received(sc, geom, x, pulse, os, 77, true);
    CHECK((y - y2).norm() == 0.0);
    const auto y3 = synthesize_received(sc, geom, x, pulse, os, 78, true);
    CHECK((y - y3).norm() != 0.0);
}

TEST_CASE("derivative correlation matches its prediction on the diagonal")
{
    const auto sc = scene1();
    const auto geom = geometry::scene_geometry(sc);
    const auto report = validate_lemma1(sc, geom, pulses::make_pulse("g1"),
                                        iso_cov(sc), 0, 0, 3000, 2024, 16);
    CHECK(report.predicted == doctest::Approx(2526.61872667888).epsilon(1e-9));
    CHECK(report.ratio == doctest::Approx(1.0).epsilon(0.04));
    CHECK(report.standard_error > 0.0);
    CHECK(report.trials == 3000);
    CHECK(report.oversampling == 16);

    // The analytic-derivative path removes the finite-difference bias and
    // must also sit on the prediction.
    const auto exact = validate_lemma1(sc, geom, pulses::make_pulse("g1"),
                                       iso_cov(sc), 0, 0, 3000, 2024, 16,
                                       std::nullopt, true);
    CHECK(exact.ratio == doctest::Approx(1.0).epsilon(0.04));
}

TEST_CASE("cross-device derivative correlation vanishes")
{
    auto sc = scene1();
    sc.devices.push_back({{1.0, -1.0}, 1.0, 1.0});
    const auto geom = geometry::scene_geometry(sc);
    const double dt = sc.symbol_duration;
    const auto report = validate_lemma1(
        sc, geom, pulses::make_pulse("g1"), iso_cov(sc), 0, 1, 3000, 4242, 16,
        std::vector<double>{0.0, dt});
    CHECK(report.predicted == 0.0);
    CHECK(std::abs(report.empirical) < 5.0 * report.standard_error);

    // Fractional-interval separations are rejected for the zero-mean claim.
    CHECK_THROWS_AS(validate_lemma1(sc, geom, pulses::make_pulse("g1"),
                                    iso_cov(sc), 0, 1, 3000, 1, 16,
                                    std::vector<double>{0.0, 0.3 * dt}),
                    ConfigError);
}

TEST_CASE("derivative-correlation guardrails")
{
    const auto sc = scene1();
    const auto geom = geometry::scene_geometry(sc);
    const auto pulse = pulses::make_pulse("g1");
    CHECK_THROWS_AS(validate_lemma1(sc, geom, pulse, iso_cov(sc), 0, 0, 10, 1, 16),
                    ConfigError); // too few trials
    CHECK_THROWS_AS(validate_lemma1(sc, geom, pulse, iso_cov(sc), 0, 0, 3000, 1, 2),
                    ConfigError); // finite differences need >= 4 samples/symbol
}

TEST_CASE("noiseless grid-search estimation recovers the truth exactly")
{
    const auto sc = scene1();
    SimulationRun run;
    run.trials = 3;
    run.seed = 31337;
    run.with_noise = false;
    const auto report = mse_vs_crb(sc, pulses::make_pulse("g1"), run);
    CHECK(report.trials == 3);
    CHECK(report.mse_delay == 0.0);
    CHECK(report.mse_doa == 0.0);
    CHECK(report.bias_delay == 0.0);
    CHECK(report.bias_doa == 0.0);
    CHECK(report.crb_delay > 0.0);
    CHECK(report.crb_doa > 0.0);
    CHECK(report.crb_doa_physical ==
          doctest::Approx(1.31638e-07).epsilon(1e-4));
    CHECK(report.seed == 31337);
}

TEST_CASE("noisy estimation lands in the expected band at high power")
{
    const auto sc = scene1();
    SimulationRun run;
    run.trials = 40;
    run.seed = 404;
    run.power_scale = 1000.0;
    const auto report = mse_vs_crb(sc, pulses::make_pulse("g1"), run);
    CHECK(report.ratio_doa_physical > 0.3);
    CHECK(report.ratio_doa_physical < 20.0);
    CHECK(report.power_scale == 1000.0);
    // Physical bound scales inversely with the power multiplier.
    CHECK(report.crb_doa_physical ==
          doctest::Approx(1.31638e-10).epsilon(1e-4));

    // Bitwise reproducibility.
    const auto again = mse_vs_crb(sc, pulses::make_pulse("g1"), run);
    CHECK(again.mse_doa == report.mse_doa);
    CHECK(again.mse_delay == report.mse_delay);
}

TEST_CASE("estimator experiment guardrails")
{
    auto sc = scene1();
    SimulationRun run;
    run.trials = 0;
    CHECK_THROWS_AS(mse_vs_crb(sc, pulses::make_pulse("g1"), run), ConfigError);

    run.trials = 2;
    run.power_scale = 0.0;
    CHECK_THROWS_AS(mse_vs_crb(sc, pulses::make_pulse("g1"), run), ConfigError);

    run.power_scale = 1.0;
    sc.devices.push_back({{1.0, -1.0}, 1.0, 1.0});
    CHECK_THROWS_AS(mse_vs_crb(sc, pulses::make_pulse("g1"), run), ConfigError);
}

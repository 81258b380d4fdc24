// test_pulses.cpp
// Built-in pulse shapes and their information-matrix constants.
//
// SPDX-License-Identifier: MIT
// Copyright (c) 2026 bsisac contributors. See LICENSE for details.

#include <doctest.h>

#include <cmath>

#include "bsisac/errors.hpp"
#include "bsisac/pulses.hpp"

using namespace bsisac;
using namespace bsisac::pulses;

namespace {
constexpr double kDt = 5e-7;
} // namespace

TEST_CASE("pulse lookup by name")
{
    CHECK(make_pulse("g1").kind == PulseKind::kCosine);
    CHECK(make_pulse("cosine").kind == PulseKind::kCosine);
    CHECK(make_pulse("g2").kind == PulseKind::kSinc);
    CHECK(make_pulse("sinc").kind == PulseKind::kSinc);
    CHECK(make_pulse("g3").kind == PulseKind::kLinear);
    CHECK(make_pulse("linear").kind == PulseKind::kLinear);
    CHECK_THROWS_AS(make_pulse("g4"), ConfigError);
}

TEST_CASE("all built-in pulses have unit average power")
{
    for (const char* name : {"g1", "g2", "g3"}) {
        const auto pc = pulse_constants(make_pulse(name), kDt);
        CHECK(pc.avg_power == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(pc.energy == doctest::Approx(kDt).epsilon(1e-9));
        CHECK(pc.dt == kDt);
        CHECK(std::abs(pc.deriv_overlap.imag()) < 1e-12); // real-valued pulses
    }
}

TEST_CASE("half-cosine constants")
{
    const auto pc = pulse_constants(make_pulse("g1"), kDt);
    CHECK(pc.energy == doctest::Approx(5e-7).epsilon(1e-10));
    CHECK(pc.msb == doctest::Approx(9869604401089.36).epsilon(1e-9));
    CHECK(pc.deriv_overlap.real() == doctest::Approx(-1.0).epsilon(1e-9));
}

TEST_CASE("truncated-sinc constants")
{
    CHECK(sinc_normalizer() == doctest::Approx(1.41815157613263).epsilon(1e-10));
    const auto g2 = make_pulse("g2");
    // Value at t = 0 pins the normalization sqrt(pi/a), a = int_0^pi sinc^2.
    CHECK(eval_pulse(g2, 0.0, kDt) == doctest::Approx(1.48837926238698).epsilon(1e-10));
    const auto pc = pulse_constants(g2, kDt);
    CHECK(pc.msb == doctest::Approx(10205775429847.7).epsilon(1e-8));
    CHECK(pc.deriv_overlap.real() == doctest::Approx(-1.1076364143518).epsilon(1e-9));
}

TEST_CASE("linear-ramp constants")
{
    const auto pc = pulse_constants(make_pulse("g3"), kDt);
    CHECK(pc.msb == doctest::Approx(1.2e13).epsilon(1e-10));
    CHECK(pc.deriv_overlap.real() == doctest::Approx(-1.5).epsilon(1e-10));
}

TEST_CASE("pulses vanish outside the support")
{
    for (const char* name : {"g1", "g2", "g3"}) {
        const auto p = make_pulse(name);
        CHECK(eval_pulse(p, -1e-9, kDt) == 0.0);
        CHECK(eval_pulse(p, kDt + 1e-9, kDt) == 0.0);
        CHECK(eval_pulse_derivative(p, -1e-9, kDt) == 0.0);
        CHECK(eval_pulse_derivative(p, kDt + 1e-9, kDt) == 0.0);
    }
}

TEST_CASE("deriv_overlap equals the boundary identity for real pulses")
{
    // For real pulses the derivative overlap integrates to
    // (g(dt-)^2 - g(0)^2) / 2 regardless of shape.
    for (const char* name : {"g1", "g2", "g3"}) {
        const auto p = make_pulse(name);
        const auto pc = pulse_constants(p, kDt);
        const double tail = eval_pulse(p, kDt * (1.0 - 1e-9), kDt);
        const double head = eval_pulse(p, 0.0, kDt);
        const double expect = 0.5 * (tail * tail - head * head);
        CHECK(pc.deriv_overlap.real() == doctest::Approx(expect).epsilon(1e-6));
    }
}

TEST_CASE("quadrature converges and rejects tiny grids")
{
    const auto p = make_pulse("g1");
    const auto coarse = pulse_constants(p, kDt, 257);
    const auto fine = pulse_constants(p, kDt, 8193);
    CHECK(coarse.msb == doctest::Approx(fine.msb).epsilon(1e-8));
    CHECK_THROWS_AS(pulse_constants(p, kDt, 8), ConfigError);
    CHECK_THROWS_AS(pulse_constants(p, -1.0), ConfigError);
}

TEST_CASE("finite-difference derivative fallback tracks the analytic one")
{
    auto p = make_pulse("g1");
    const auto analytic = pulse_constants(p, kDt);
    p.derivative = nullptr; // force the central-difference fallback
    const auto fd = pulse_constants(p, kDt);
    CHECK(fd.msb == doctest::Approx(analytic.msb).epsilon(1e-6));
    CHECK(fd.deriv_overlap.real() ==
          doctest::Approx(analytic.deriv_overlap.real()).epsilon(1e-6));
}

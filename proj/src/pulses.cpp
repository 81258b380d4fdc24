// pulses.cpp
// Built-in pulse shapes and quadrature of their information constants.
//
// SPDX-License-Identifier: MIT
// Copyright (c) 2026 bsisac contributors. See LICENSE for details.

#include "bsisac/pulses.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "bsisac/errors.hpp"

namespace bsisac::pulses {

namespace {

constexpr double kPi = std::numbers::pi;

/// sinc(x) = sin(pi x)/(pi x) with the removable singularity filled in.
double sinc(double x)
{
    const double u = kPi * x;
    if (std::abs(u) < 1e-6) {
        const double u2 = u * u;
        return 1.0 - u2 / 6.0 + u2 * u2 / 120.0;
    }
    return std::sin(u) / u;
}

/// d/dx sinc(x); series around 0 avoids 0/0 in (u cos u - sin u)/u^2.
double sinc_derivative(double x)
{
    const double u = kPi * x;
    if (std::abs(u) < 1e-4) {
        // (u cos u - sin u)/u^2 = -u/3 + u^3/30 - ...
        return kPi * (-u / 3.0 + u * u * u / 30.0);
    }
    return kPi * (u * std::cos(u) - std::sin(u)) / (u * u);
}

/**
 * Composite Simpson rule over [0, dt] with an odd number of nodes.
 */
template <typename F>
double simpson(F&& f, double dt, int points)
{
    const int n = (points % 2 == 0) ? points + 1 : points; // odd node count
    const double h = dt / static_cast<double>(n - 1);
    double odd_sum = 0.0;
    double even_sum = 0.0;
    for (int i = 1; i < n - 1; ++i) {
        const double v = f(h * static_cast<double>(i));
        if (!std::isfinite(v)) {
            throw NumericalError("non-finite pulse integrand sample at t = " +
                                 std::to_string(h * static_cast<double>(i)));
        }
        if (i % 2 == 1) odd_sum += v; else even_sum += v;
    }
    const double first = f(0.0);
    const double last = f(dt);
    if (!std::isfinite(first) || !std::isfinite(last)) {
        throw NumericalError("non-finite pulse integrand sample at an endpoint");
    }
    return h / 3.0 * (first + last + 4.0 * odd_sum + 2.0 * even_sum);
}

} // namespace

double sinc_normalizer()
{
    // a = integral_0^pi sin^2 x / x^2 dx; smooth after filling x -> 0 with 1.
    static const double a = [] {
        auto integrand = [](double x) {
            if (x < 1e-8) return 1.0;
            const double s = std::sin(x) / x;
            return s * s;
        };
        const int n = 20001;
        const double h = kPi / static_cast<double>(n - 1);
        double odd_sum = 0.0, even_sum = 0.0;
        for (int i = 1; i < n - 1; ++i) {
            const double v = integrand(h * static_cast<double>(i));
            if (i % 2 == 1) odd_sum += v; else even_sum += v;
        }
        return h / 3.0 * (integrand(0.0) + integrand(kPi) + 4.0 * odd_sum + 2.0 * even_sum);
    }();
    return a;
}

PulseShape make_pulse(PulseKind kind)
{
    PulseShape p;
    p.kind = kind;
    switch (kind) {
    case PulseKind::kCosine:
        p.name = "g1";
        p.value = [](double t, double dt) {
            return std::sqrt(2.0) * std::cos(kPi * t / (2.0 * dt));
        };
        p.derivative = [](double t, double dt) {
            return -std::sqrt(2.0) * kPi / (2.0 * dt) * std::sin(kPi * t / (2.0 * dt));
        };
        return p;
    case PulseKind::kSinc:
        p.name = "g2";
        p.value = [](double t, double dt) {
            return std::sqrt(kPi / sinc_normalizer()) * sinc(t / dt);
        };
        p.derivative = [](double t, double dt) {
            return std::sqrt(kPi / sinc_normalizer()) * sinc_derivative(t / dt) / dt;
        };
        return p;
    case PulseKind::kLinear:
        p.name = "g3";
        p.value = [](double t, double dt) {
            return std::sqrt(3.0) * (1.0 - t / dt);
        };
        p.derivative = [](double, double dt) {
            return -std::sqrt(3.0) / dt;
        };
        return p;
    case PulseKind::kCustom:
        break;
    }
    throw ConfigError("make_pulse(kCustom) is not meaningful; construct a PulseShape directly");
}

PulseShape make_pulse(std::string_view name)
{
    if (name == "g1" || name == "cosine") return make_pulse(PulseKind::kCosine);
    if (name == "g2" || name == "sinc") return make_pulse(PulseKind::kSinc);
    if (name == "g3" || name == "linear") return make_pulse(PulseKind::kLinear);
    throw ConfigError("unknown pulse '" + std::string(name) +
                      "' (expected g1/cosine, g2/sinc, or g3/linear)");
}

double eval_pulse(const PulseShape& pulse, double t, double dt)
{
    if (!pulse.value) throw ConfigError("pulse shape has no evaluator");
    if (t < 0.0 || t > dt) return 0.0;
    return pulse.value(t, dt);
}

double eval_pulse_derivative(const PulseShape& pulse, double t, double dt)
{
    if (t < 0.0 || t > dt) return 0.0;
    if (pulse.derivative) return pulse.derivative(t, dt);
    if (!pulse.value) throw ConfigError("pulse shape has no evaluator");
    const double h = dt * 1e-6;
    // One-sided second-order stencils at the endpoints keep the difference
    // inside the pulse support; centered otherwise.
    if (t < h) {
        return (-3.0 * pulse.value(t, dt) + 4.0 * pulse.value(t + h, dt) -
                pulse.value(t + 2.0 * h, dt)) / (2.0 * h);
    }
    if (t > dt - h) {
        return (3.0 * pulse.value(t, dt) - 4.0 * pulse.value(t - h, dt) +
                pulse.value(t - 2.0 * h, dt)) / (2.0 * h);
    }
    return (pulse.value(t + h, dt) - pulse.value(t - h, dt)) / (2.0 * h);
}

PulseConstants pulse_constants(const PulseShape& pulse, double dt, int quadrature_points)
{
    if (!(dt > 0.0)) throw ConfigError("pulse constants require dt > 0");
    if (quadrature_points < 64) {
        throw ConfigError("pulse-constant quadrature needs at least 64 points, got " +
                          std::to_string(quadrature_points));
    }
    if (!pulse.value) throw ConfigError("pulse shape has no evaluator");

    auto g = [&](double t) { return pulse.value(t, dt); };
    auto gd = [&](double t) { return eval_pulse_derivative(pulse, t, dt); };

    PulseConstants c;
    c.dt = dt;
    c.energy = simpson([&](double t) { const double v = g(t); return v * v; },
                       dt, quadrature_points);
    const double deriv_energy = simpson([&](double t) { const double v = gd(t); return v * v; },
                                        dt, quadrature_points);
    if (!(c.energy > 0.0)) throw NumericalError("pulse energy must be positive");
    c.avg_power = c.energy / dt;
    c.msb = deriv_energy / c.energy;
    // For real-valued pulses integral g' g = (g(dt)^2 - g(0)^2)/2 exactly;
    // quadrature of the product reproduces it and is used as the stored value.
    c.deriv_overlap = simpson([&](double t) { return gd(t) * g(t); }, dt, quadrature_points);
    return c;
}

} // namespace bsisac::pulses

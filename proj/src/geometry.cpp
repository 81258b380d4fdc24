// geometry.cpp
// Scene construction and closed-form bistatic localization.
//
// SPDX-License-Identifier: MIT
// Copyright (c) 2026 bsisac contributors. See LICENSE for details.

#include "bsisac/geometry.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "bsisac/errors.hpp"

namespace bsisac::geometry {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double distance(Position a, Position b)
{
    return std::hypot(a.x - b.x, a.y - b.y);
}

Eigen::VectorXcd steering(double angle, int num_elements, double spacing_ratio)
{
    if (num_elements < 1) {
        throw ConfigError("steering vector needs at least one element, got " +
                          std::to_string(num_elements));
    }
    if (!(spacing_ratio > 0.0)) {
        throw ConfigError("antenna spacing ratio must be positive");
    }
    Eigen::VectorXcd v(num_elements);
    const double slope = kTwoPi * spacing_ratio * std::sin(angle);
    for (int k = 0; k < num_elements; ++k) {
        v(k) = std::polar(1.0, slope * static_cast<double>(k));
    }
    return v;
}

} // namespace

double pathloss(double d, double ref, double exponent)
{
    if (!(d > 0.0) || !std::isfinite(d)) {
        throw GeometryError("pathloss requires a positive finite distance, got " +
                            std::to_string(d));
    }
    return ref * std::pow(d, -exponent);
}

Eigen::VectorXcd steering_tx(double theta, int num_elements, double spacing_ratio)
{
    return steering(theta, num_elements, spacing_ratio);
}

Eigen::VectorXcd steering_rx(double phi, int num_elements, double spacing_ratio)
{
    return steering(phi, num_elements, spacing_ratio);
}

void validate_scenario(const Scenario& s)
{
    if (s.devices.empty()) throw ConfigError("scenario needs at least one backscatter device");
    if (s.array.num_tx < 1 || s.array.num_rx < 1) {
        throw ConfigError("array sizes must be at least 1");
    }
    if (!(s.array.spacing_ratio > 0.0)) throw ConfigError("antenna spacing ratio must be positive");
    if (!(s.pathloss_ref > 0.0)) throw ConfigError("pathloss reference gain must be positive");
    if (!(s.pathloss_exponent >= 0.0)) throw ConfigError("pathloss exponent must be non-negative");
    if (!(s.clutter_power > 0.0) || !(s.noise_power > 0.0)) {
        throw ConfigError("clutter and noise powers must be positive");
    }
    if (!(s.symbol_duration > 0.0)) throw ConfigError("symbol duration must be positive");
    if (s.symbols_per_slot < 1) throw ConfigError("symbols per slot must be at least 1");
    if (!(s.response_delay >= 0.0)) throw ConfigError("response delay must be non-negative");
    if (!(s.power_budget > 0.0)) throw ConfigError("power budget must be positive");
    for (std::size_t l = 0; l < s.devices.size(); ++l) {
        const auto& dev = s.devices[l];
        const std::string tag = "device " + std::to_string(l + 1);
        if (dev.symbol < 0.0 || dev.symbol > 1.0) {
            throw ConfigError(tag + ": symbol must lie in [0, 1]");
        }
        if (dev.reflection_fraction < 0.0 || dev.reflection_fraction > 1.0) {
            throw ConfigError(tag + ": reflection fraction must lie in [0, 1]");
        }
    }
}

std::vector<BdGeometry> scene_geometry(const Scenario& s)
{
    validate_scenario(s);

    const double d0 = distance(s.tx_position, s.rx_position);
    if (!(d0 > 0.0)) {
        throw GeometryError("transmitter and receiver are co-located; baseline undefined");
    }
    const double beta = std::atan2(s.rx_position.y - s.tx_position.y,
                                   s.rx_position.x - s.tx_position.x);

    std::vector<BdGeometry> out;
    out.reserve(s.devices.size());
    for (std::size_t l = 0; l < s.devices.size(); ++l) {
        const auto& dev = s.devices[l];
        BdGeometry g;
        g.d_0 = d0;
        g.beta = beta;
        g.d_t = distance(dev.position, s.tx_position);
        g.d_r = distance(dev.position, s.rx_position);
        if (!(g.d_t > 0.0) || !(g.d_r > 0.0)) {
            throw GeometryError("device " + std::to_string(l + 1) +
                                " is co-located with the transmitter or receiver");
        }
        g.theta = std::atan2(dev.position.y - s.tx_position.y,
                             dev.position.x - s.tx_position.x);
        g.phi = std::atan2(dev.position.y - s.rx_position.y,
                           dev.position.x - s.rx_position.x);
        g.tau_t = g.d_t / kSpeedOfLight;
        g.tau_r = g.d_r / kSpeedOfLight;
        g.tau_total = g.tau_t + s.response_delay + g.tau_r;
        g.alpha = std::sqrt(dev.reflection_fraction *
                            pathloss(g.d_t, s.pathloss_ref, s.pathloss_exponent) *
                            pathloss(g.d_r, s.pathloss_ref, s.pathloss_exponent));
        g.delay_index = static_cast<int>(std::lround(g.tau_total / s.symbol_duration));
        g.channel = steering_rx(g.phi, s.array.num_rx, s.array.spacing_ratio) *
                    steering_tx(g.theta, s.array.num_tx, s.array.spacing_ratio).transpose();
        out.push_back(std::move(g));
    }
    return out;
}

PositionFix locate_bd(double tau_hat, double phi_hat, const Scenario& s)
{
    const double d0 = distance(s.tx_position, s.rx_position);
    if (!(d0 > 0.0)) {
        throw GeometryError("transmitter and receiver are co-located; baseline undefined");
    }
    const double beta = std::atan2(s.rx_position.y - s.tx_position.y,
                                   s.rx_position.x - s.tx_position.x);
    const double path = kSpeedOfLight * (tau_hat - s.response_delay);
    if (!(path > d0)) {
        throw GeometryError("delay estimate implies a two-hop path (" + std::to_string(path) +
                            " m) not exceeding the baseline (" + std::to_string(d0) +
                            " m); no ellipse point exists");
    }
    const double denominator = 2.0 * (d0 * std::cos(phi_hat - beta) + path);
    if (!(denominator > 0.0)) {
        throw GeometryError("localization denominator is non-positive; the delay/angle pair "
                            "lies outside the valid bistatic region");
    }
    PositionFix fix;
    fix.d_r = (path * path - d0 * d0) / denominator;
    fix.x = s.rx_position.x + fix.d_r * std::cos(phi_hat);
    fix.y = s.rx_position.y + fix.d_r * std::sin(phi_hat);
    fix.theta = std::atan2(fix.y - s.tx_position.y, fix.x - s.tx_position.x);
    return fix;
}

std::vector<BackscatterDevice> circle_devices(Position center, double radius,
                                              int count, bool on_boundary,
                                              double start_angle)
{
    if (count < 1) throw ConfigError("circle device count must be at least 1");
    if (!(radius > 0.0)) throw ConfigError("circle radius must be positive");

    // Deterministic symbol assignment cycling through the nonzero eighth-step
    // alphabet {1/8, 2/8, ..., 1}; a zero symbol would carry no information.
    auto symbol_for = [](int k) { return static_cast<double>(k % 8 + 1) / 8.0; };

    std::vector<BackscatterDevice> devices;
    devices.reserve(static_cast<std::size_t>(count));
    if (on_boundary) {
        for (int k = 0; k < count; ++k) {
            const double angle = start_angle +
                kTwoPi * static_cast<double>(k) / static_cast<double>(count);
            devices.push_back({{center.x + radius * std::cos(angle),
                                center.y + radius * std::sin(angle)},
                               symbol_for(k), 1.0});
        }
    } else {
        // Vogel sunflower spiral: radius ~ sqrt((k+1/2)/count), golden-angle turns.
        const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
        for (int k = 0; k < count; ++k) {
            const double r = radius * std::sqrt((static_cast<double>(k) + 0.5) /
                                                static_cast<double>(count));
            const double angle = start_angle + golden * static_cast<double>(k);
            devices.push_back({{center.x + r * std::cos(angle),
                                center.y + r * std::sin(angle)},
                               symbol_for(k), 1.0});
        }
    }
    return devices;
}

Scenario preset(std::string_view name)
{
    Scenario s;                       // field defaults carry the physics
    s.tx_position = {0.0, 0.0};
    s.rx_position = {2.0, -1.5};
    if (name == "scenario-1") {
        s.devices = {{{1.5, -0.5}, 1.0, 1.0}};
    } else if (name == "scenario-2") {
        // Half-step rotation (pi/9): with a zero start angle the first ring
        // device would land at (2.0, -0.5), exactly endfire to the receiver
        // at (2.0, -1.5), where the angle bound diverges.
        s.devices = circle_devices({1.5, -0.5}, 0.5, 9, /*on_boundary=*/true,
                                   std::numbers::pi / 9.0);
    } else {
        throw ConfigError("unknown preset '" + std::string(name) +
                          "' (expected scenario-1 or scenario-2)");
    }
    return s;
}

} // namespace bsisac::geometry

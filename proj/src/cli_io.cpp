// cli_io.cpp
// INI configuration schema, record/CSV emitters, and the CLI front end.
//
// SPDX-License-Identifier: MIT
// Copyright (c) 2026 bsisac contributors. See LICENSE for details.

#include "bsisac/cli_io.hpp"

#include <CLI11.hpp>

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>

#include "bsisac/errors.hpp"
#include "bsisac/rate.hpp"

namespace bsisac::io {

namespace {

// ---------------------------------------------------------------------------
// INI parsing
// ---------------------------------------------------------------------------

struct IniEntry {
    std::string section;
    std::string key;
    std::vector<std::string> values;
    int line = 0;
};

std::string trim(const std::string& s)
{
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

std::vector<IniEntry> tokenize_ini(const std::string& text, const std::string& origin)
{
    std::vector<IniEntry> entries;
    std::istringstream in(text);
    std::string line;
    std::string section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto comment = line.find_first_of("#;");
        if (comment != std::string::npos) line.erase(comment);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') {
                throw ConfigError(origin + ":" + std::to_string(lineno) +
                                  ": unterminated section header");
            }
            section = trim(line.substr(1, line.size() - 2));
            if (section.empty()) {
                throw ConfigError(origin + ":" + std::to_string(lineno) +
                                  ": empty section name");
            }
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(origin + ":" + std::to_string(lineno) +
                              ": expected key = value");
        }
        IniEntry e;
        e.section = section;
        e.key = trim(line.substr(0, eq));
        e.line = lineno;
        if (e.key.empty()) {
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
        }
        std::istringstream vals(trim(line.substr(eq + 1)));
        std::string tok;
        while (vals >> tok) e.values.push_back(tok);
        if (e.values.empty()) {
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": key '" +
                              e.key + "' has no value");
        }
        entries.push_back(std::move(e));
    }
    return entries;
}

[[noreturn]] void entry_error(const std::string& origin, const IniEntry& e,
                              const std::string& message)
{
    throw ConfigError(origin + ":" + std::to_string(e.line) + ": [" + e.section +
                      "] " + e.key + ": " + message);
}

double to_double(const std::string& origin, const IniEntry& e, std::size_t idx = 0)
{
    if (idx >= e.values.size()) entry_error(origin, e, "missing value");
    const std::string& s = e.values[idx];
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        entry_error(origin, e, "'" + s + "' is not a number");
    }
    return v;
}

long long to_int(const std::string& origin, const IniEntry& e, std::size_t idx = 0)
{
    if (idx >= e.values.size()) entry_error(origin, e, "missing value");
    const std::string& s = e.values[idx];
    long long v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        entry_error(origin, e, "'" + s + "' is not an integer");
    }
    return v;
}

std::uint64_t to_uint64(const std::string& origin, const IniEntry& e,
                        std::size_t idx = 0)
{
    if (idx >= e.values.size()) entry_error(origin, e, "missing value");
    const std::string& s = e.values[idx];
    std::uint64_t v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        entry_error(origin, e, "'" + s + "' is not an unsigned integer");
    }
    return v;
}

bool to_bool(const std::string& origin, const IniEntry& e, std::size_t idx = 0)
{
    if (idx >= e.values.size()) entry_error(origin, e, "missing value");
    const std::string& s = e.values[idx];
    if (s == "true" || s == "1") return true;
    if (s == "false" || s == "0") return false;
    entry_error(origin, e, "'" + s + "' is not a boolean (true/false/1/0)");
}

void expect_values(const std::string& origin, const IniEntry& e, std::size_t n)
{
    if (e.values.size() != n) {
        entry_error(origin, e, "expected " + std::to_string(n) + " value(s), got " +
                                   std::to_string(e.values.size()));
    }
}

double dbm_to_watts(double dbm) { return 1e-3 * std::pow(10.0, dbm / 10.0); }
double db_to_linear_loss(double db) { return std::pow(10.0, -db / 10.0); }

// ---------------------------------------------------------------------------
// Config assembly
// ---------------------------------------------------------------------------

struct DeviceDraft {
    std::map<int, geometry::BackscatterDevice> explicit_devices;
    std::optional<int> bd_count;
    std::optional<geometry::Position> circle_center;
    std::optional<double> circle_radius;
    std::optional<int> circle_count;
    bool circle_boundary = true;
    std::optional<double> reflection_override;
};

void apply_entry(Config& cfg, DeviceDraft& draft, const std::string& origin,
                 const IniEntry& e)
{
    auto& sc = cfg.scenario;
    if (e.section == "scenario") {
        if (e.key == "preset") {
            return;  // handled in the first pass
        } else if (e.key == "tx") {
            expect_values(origin, e, 2);
            sc.tx_position = {to_double(origin, e, 0), to_double(origin, e, 1)};
        } else if (e.key == "rx") {
            expect_values(origin, e, 2);
            sc.rx_position = {to_double(origin, e, 0), to_double(origin, e, 1)};
        } else if (e.key == "mt") {
            sc.array.num_tx = static_cast<int>(to_int(origin, e));
        } else if (e.key == "mr") {
            sc.array.num_rx = static_cast<int>(to_int(origin, e));
        } else if (e.key == "spacing_ratio") {
            sc.array.spacing_ratio = to_double(origin, e);
        } else if (e.key == "bd_count") {
            draft.bd_count = static_cast<int>(to_int(origin, e));
        } else if (e.key.rfind("bd", 0) == 0 && e.key.size() > 2 &&
                   std::isdigit(static_cast<unsigned char>(e.key[2]))) {
            int index = 0;
            const auto res = std::from_chars(e.key.data() + 2,
                                             e.key.data() + e.key.size(), index);
            if (res.ec != std::errc() || res.ptr != e.key.data() + e.key.size() ||
                index < 1) {
                entry_error(origin, e, "device keys are bd1, bd2, ...");
            }
            if (e.values.size() != 3 && e.values.size() != 4) {
                entry_error(origin, e, "expected: x y symbol [reflection]");
            }
            geometry::BackscatterDevice dev;
            dev.position = {to_double(origin, e, 0), to_double(origin, e, 1)};
            dev.symbol = to_double(origin, e, 2);
            dev.reflection_fraction =
                e.values.size() == 4 ? to_double(origin, e, 3) : 1.0;
            draft.explicit_devices[index] = dev;
        } else if (e.key == "circle_center") {
            expect_values(origin, e, 2);
            draft.circle_center =
                geometry::Position{to_double(origin, e, 0), to_double(origin, e, 1)};
        } else if (e.key == "circle_radius") {
            draft.circle_radius = to_double(origin, e);
        } else if (e.key == "circle_count") {
            draft.circle_count = static_cast<int>(to_int(origin, e));
        } else if (e.key == "circle_placement") {
            const std::string& v = e.values.at(0);
            if (v == "boundary") draft.circle_boundary = true;
            else if (v == "disk") draft.circle_boundary = false;
            else entry_error(origin, e, "placement is 'boundary' or 'disk'");
        } else {
            entry_error(origin, e, "unknown key");
        }
    } else if (e.section == "physics") {
        if (e.key == "pathloss_ref_db") sc.pathloss_ref = db_to_linear_loss(to_double(origin, e));
        else if (e.key == "pathloss_ref") sc.pathloss_ref = to_double(origin, e);
        else if (e.key == "pathloss_exponent") sc.pathloss_exponent = to_double(origin, e);
        else if (e.key == "clutter_dbm") sc.clutter_power = dbm_to_watts(to_double(origin, e));
        else if (e.key == "clutter_power") sc.clutter_power = to_double(origin, e);
        else if (e.key == "noise_dbm") sc.noise_power = dbm_to_watts(to_double(origin, e));
        else if (e.key == "noise_power") sc.noise_power = to_double(origin, e);
        else if (e.key == "power_dbm") sc.power_budget = dbm_to_watts(to_double(origin, e));
        else if (e.key == "power_budget") sc.power_budget = to_double(origin, e);
        else if (e.key == "symbol_duration") sc.symbol_duration = to_double(origin, e);
        else if (e.key == "symbols_per_slot") sc.symbols_per_slot = static_cast<int>(to_int(origin, e));
        else if (e.key == "response_delay") sc.response_delay = to_double(origin, e);
        else if (e.key == "reflection_fraction") draft.reflection_override = to_double(origin, e);
        else entry_error(origin, e, "unknown key");
    } else if (e.section == "pulse") {
        if (e.key == "shape") cfg.pulse = pulses::make_pulse(e.values.at(0));
        else if (e.key == "quadrature_points") cfg.quadrature_points = static_cast<int>(to_int(origin, e));
        else entry_error(origin, e, "unknown key");
    } else if (e.section == "solver") {
        if (e.key == "mu0") cfg.solver.mu0 = to_double(origin, e);
        else if (e.key == "mu_growth") cfg.solver.mu_growth = to_double(origin, e);
        else if (e.key == "gap_tol") cfg.solver.gap_tol = to_double(origin, e);
        else if (e.key == "newton_tol") cfg.solver.newton_tol = to_double(origin, e);
        else if (e.key == "max_stages") cfg.solver.max_stages = static_cast<int>(to_int(origin, e));
        else if (e.key == "max_newton") cfg.solver.max_newton = static_cast<int>(to_int(origin, e));
        else if (e.key == "warm_start") cfg.solver.warm_start = to_bool(origin, e);
        else if (e.key == "verbose") cfg.solver.verbose = to_bool(origin, e);
        else if (e.key == "gamma_th") cfg.gamma_th = to_double(origin, e);
        else entry_error(origin, e, "unknown key");
    } else if (e.section == "sweep") {
        if (e.key == "count") cfg.sweep.count = static_cast<int>(to_int(origin, e));
        else if (e.key == "gamma_min") cfg.sweep.gamma_min = to_double(origin, e);
        else if (e.key == "gamma_max") {
            if (e.values.at(0) == "auto") cfg.sweep.gamma_max.reset();
            else cfg.sweep.gamma_max = to_double(origin, e);
        } else entry_error(origin, e, "unknown key");
    } else if (e.section == "simulation") {
        if (e.key == "trials") cfg.simulation.trials = static_cast<int>(to_int(origin, e));
        else if (e.key == "seed") cfg.simulation.seed = to_uint64(origin, e);
        else if (e.key == "power_scale") cfg.simulation.power_scale = to_double(origin, e);
        else if (e.key == "delay_grid") cfg.simulation.delay_grid = to_double(origin, e);
        else if (e.key == "doa_grid") cfg.simulation.doa_grid = to_double(origin, e);
        else if (e.key == "with_noise") cfg.simulation.with_noise = to_bool(origin, e);
        else entry_error(origin, e, "unknown key");
    } else {
        throw ConfigError(origin + ":" + std::to_string(e.line) + ": unknown section [" +
                          e.section + "]");
    }
}

void finalize_devices(Config& cfg, DeviceDraft& draft, const std::string& origin)
{
    auto& sc = cfg.scenario;
    if (!draft.explicit_devices.empty() || draft.bd_count) {
        const int count = draft.bd_count
                              ? *draft.bd_count
                              : static_cast<int>(draft.explicit_devices.size());
        if (static_cast<int>(draft.explicit_devices.size()) != count) {
            throw ConfigError(origin + ": bd_count = " + std::to_string(count) +
                              " but " + std::to_string(draft.explicit_devices.size()) +
                              " bdN entries were given");
        }
        sc.devices.clear();
        for (int i = 1; i <= count; ++i) {
            const auto it = draft.explicit_devices.find(i);
            if (it == draft.explicit_devices.end()) {
                throw ConfigError(origin + ": missing device entry bd" +
                                  std::to_string(i));
            }
            sc.devices.push_back(it->second);
        }
    } else if (draft.circle_count || draft.circle_radius || draft.circle_center) {
        if (!(draft.circle_center && draft.circle_radius && draft.circle_count)) {
            throw ConfigError(origin + ": circle placement needs circle_center, "
                                       "circle_radius, and circle_count");
        }
        sc.devices = geometry::circle_devices(*draft.circle_center,
                                              *draft.circle_radius,
                                              *draft.circle_count,
                                              draft.circle_boundary);
    }
    if (draft.reflection_override) {
        for (auto& dev : sc.devices) {
            dev.reflection_fraction = *draft.reflection_override;
        }
    }
}

// ---------------------------------------------------------------------------
// Record and CSV helpers
// ---------------------------------------------------------------------------

void emit_kv(std::ostream& out, const std::string& key, double value)
{
    out << key << '=' << format_double(value) << '\n';
}

void emit_kv(std::ostream& out, const std::string& key, const std::string& value)
{
    out << key << '=' << value << '\n';
}

std::string sweep_status(const opt::TradeoffPoint& p)
{
    if (p.status == opt::SolveStatus::kOptimal && p.boundary_relaxed) {
        return "boundary-relaxed";
    }
    return opt::to_string(p.status);
}

// ---------------------------------------------------------------------------
// Subcommand implementations
// ---------------------------------------------------------------------------

pulses::PulseConstants constants_for(const Config& cfg)
{
    return pulses::pulse_constants(cfg.pulse, cfg.scenario.symbol_duration,
                                   cfg.quadrature_points);
}

void emit_crb_record(const Config& cfg, std::ostream& out)
{
    const auto geom = geometry::scene_geometry(cfg.scenario);
    const auto pc = constants_for(cfg);
    const auto mt = static_cast<Eigen::Index>(cfg.scenario.array.num_tx);
    const Eigen::MatrixXcd cov =
        (cfg.scenario.power_budget / (pc.avg_power * static_cast<double>(mt))) *
        Eigen::MatrixXcd::Identity(mt, mt);
    const fim::CrbReport rep = fim::crb_report(cfg.scenario, geom, pc, cov);

    emit_kv(out, "record", std::string("crb"));
    emit_kv(out, "pulse", cfg.pulse.name);
    emit_kv(out, "covariance", std::string("isotropic-full-power"));
    emit_kv(out, "devices", std::to_string(geom.size()));
    emit_kv(out, "crb_delay_total", rep.delay_total);
    emit_kv(out, "crb_doa_total", rep.doa_total);
    emit_kv(out, "crb_total", rep.total);
    emit_kv(out, "crb_delay_total_physical", rep.delay_total_physical);
    emit_kv(out, "crb_doa_total_physical", rep.doa_total_physical);
    emit_kv(out, "crb_total_physical", rep.total_physical);
    emit_kv(out, "numeric_total", rep.numeric_total);
    emit_kv(out, "numeric_total_physical", rep.numeric_total_physical);
    emit_kv(out, "convention_gap", rep.convention_gap);
    emit_kv(out, "ill_conditioned", std::string(rep.ill_conditioned ? "1" : "0"));
    for (Eigen::Index l = 0; l < rep.delay_per_bd.size(); ++l) {
        const std::string tag = std::to_string(l + 1);
        emit_kv(out, "crb_delay_bd" + tag, rep.delay_per_bd(l));
        emit_kv(out, "crb_doa_bd" + tag, rep.doa_per_bd(l));
    }
}

void emit_rate_record(const Config& cfg, std::ostream& out)
{
    const auto geom = geometry::scene_geometry(cfg.scenario);
    const auto pc = constants_for(cfg);
    const auto mt = static_cast<Eigen::Index>(cfg.scenario.array.num_tx);
    const Eigen::MatrixXcd cov =
        (cfg.scenario.power_budget / (pc.avg_power * static_cast<double>(mt))) *
        Eigen::MatrixXcd::Identity(mt, mt);
    const double iso_rate = rate::sum_rate(cfg.scenario, geom, cov);
    const opt::ProbeResult probe =
        opt::feasibility_probe({cfg.scenario, pc, 0.0}, cfg.solver);

    emit_kv(out, "record", std::string("rate"));
    emit_kv(out, "pulse", cfg.pulse.name);
    emit_kv(out, "devices", std::to_string(geom.size()));
    emit_kv(out, "sum_rate_isotropic", iso_rate);
    emit_kv(out, "gamma_max", probe.gamma_max);
}

int emit_optimize_record(const Config& cfg, std::ostream& out)
{
    const auto pc = constants_for(cfg);
    const opt::Solution sol =
        opt::solve({cfg.scenario, pc, cfg.gamma_th}, cfg.solver);

    emit_kv(out, "record", std::string("optimize"));
    emit_kv(out, "pulse", cfg.pulse.name);
    emit_kv(out, "status", opt::to_string(sol.status));
    emit_kv(out, "gamma_th", sol.gamma_th);
    emit_kv(out, "gamma_max", sol.gamma_max);
    emit_kv(out, "achieved_rate", sol.achieved_rate);
    emit_kv(out, "objective", sol.objective);
    emit_kv(out, "crb_total", sol.crb.total);
    emit_kv(out, "crb_delay_total", sol.crb.delay_total);
    emit_kv(out, "crb_doa_total", sol.crb.doa_total);
    emit_kv(out, "crb_total_physical", sol.crb.total_physical);
    emit_kv(out, "boundary_relaxed",
            std::string(sol.diag.boundary_relaxed ? "1" : "0"));
    emit_kv(out, "covariance_trace", sol.covariance.trace().real());
    emit_kv(out, "min_eig_covariance", sol.diag.min_eig_covariance);
    emit_kv(out, "power_slack", sol.diag.power_slack);
    emit_kv(out, "rate_slack", sol.diag.rate_slack);
    emit_kv(out, "min_lmi_eig", sol.diag.min_lmi_eig);
    emit_kv(out, "stages", std::to_string(sol.diag.stages));
    emit_kv(out, "newton_iterations", std::to_string(sol.diag.newton_iterations));
    return sol.status == opt::SolveStatus::kInfeasible ? 3 : 0;
}

void emit_sweep_csv(const Config& cfg, std::ostream& out)
{
    const auto pc = constants_for(cfg);
    const opt::TradeoffProblem problem{cfg.scenario, pc, 0.0};

    double hi = 0.0;
    if (cfg.sweep.gamma_max) {
        hi = *cfg.sweep.gamma_max;
    } else {
        hi = 1.1 * opt::feasibility_probe(problem, cfg.solver).gamma_max;
    }
    if (cfg.sweep.count < 1) throw ConfigError("sweep count must be >= 1");
    if (hi < cfg.sweep.gamma_min) {
        throw ConfigError("sweep gamma_max is below gamma_min");
    }
    std::vector<double> grid(static_cast<std::size_t>(cfg.sweep.count));
    for (int i = 0; i < cfg.sweep.count; ++i) {
        grid[static_cast<std::size_t>(i)] =
            cfg.sweep.count == 1
                ? cfg.sweep.gamma_min
                : cfg.sweep.gamma_min + (hi - cfg.sweep.gamma_min) *
                                            static_cast<double>(i) /
                                            static_cast<double>(cfg.sweep.count - 1);
    }

    const auto points = opt::sweep(problem, grid, cfg.solver);
    out << "gamma_th,crb_total,crb_delay,crb_doa,achieved_rate,status,seconds\n";
    for (const auto& p : points) {
        out << format_double(p.gamma_th) << ',' << format_double(p.crb_total) << ','
            << format_double(p.crb_delay) << ',' << format_double(p.crb_doa) << ','
            << format_double(p.achieved_rate) << ',' << sweep_status(p) << ','
            << format_double(p.seconds) << '\n';
    }
}

void emit_simulate_csv(const Config& cfg, std::ostream& out)
{
    const sim::MseReport rep =
        sim::mse_vs_crb(cfg.scenario, cfg.pulse, cfg.simulation);
    out << "trials,mse_delay,mse_doa,bias_delay,bias_doa,crb_delay,crb_doa,"
           "crb_delay_physical,crb_doa_physical,ratio_doa_physical,power_scale,"
           "seed\n";
    out << rep.trials << ',' << format_double(rep.mse_delay) << ','
        << format_double(rep.mse_doa) << ',' << format_double(rep.bias_delay) << ','
        << format_double(rep.bias_doa) << ',' << format_double(rep.crb_delay) << ','
        << format_double(rep.crb_doa) << ','
        << format_double(rep.crb_delay_physical) << ','
        << format_double(rep.crb_doa_physical) << ','
        << format_double(rep.ratio_doa_physical) << ','
        << format_double(rep.power_scale) << ',' << rep.seed << '\n';
}

// ---------------------------------------------------------------------------
// validate subcommand: deterministic library self-checks
// ---------------------------------------------------------------------------

int run_validate(const Config& cfg, std::ostream& out)
{
    int failures = 0;
    auto check = [&](bool ok, const std::string& name, const std::string& detail) {
        out << (ok ? "PASS " : "FAIL ") << name << " (" << detail << ")\n";
        if (!ok) ++failures;
    };

    // 1. Pulse-constant identities: unit average power and the boundary-value
    //    form of the derivative overlap, for every built-in shape.
    for (const char* name : {"g1", "g2", "g3"}) {
        const auto pulse = pulses::make_pulse(name);
        const double dt = cfg.scenario.symbol_duration;
        const auto pc = pulses::pulse_constants(pulse, dt, cfg.quadrature_points);
        const double g0 = pulses::eval_pulse(pulse, 0.0, dt);
        const double g1 = pulses::eval_pulse(pulse, dt * (1.0 - 1e-12), dt);
        const double expected_overlap = 0.5 * (g1 * g1 - g0 * g0);
        const bool ok_power = std::abs(pc.avg_power - 1.0) < 1e-9;
        const bool ok_overlap =
            std::abs(pc.deriv_overlap.real() - expected_overlap) <
                1e-6 * std::abs(expected_overlap) &&
            std::abs(pc.deriv_overlap.imag()) < 1e-12;
        check(ok_power && ok_overlap, std::string("pulse-constants-") + name,
              "avg_power=" + format_double(pc.avg_power) +
                  " overlap=" + format_double(pc.deriv_overlap.real()));
    }

    // 2. Geometry roundtrip: noiseless triangulation returns the device.
    {
        std::mt19937_64 rng(20260825ULL);
        auto uni = [&rng](double lo, double hi) {
            return lo + (hi - lo) * ((rng() >> 11) + 0.5) * 0x1.0p-53;
        };
        double worst = 0.0;
        int tested = 0;
        for (int i = 0; i < 200; ++i) {
            geometry::Scenario sc = geometry::preset("scenario-1");
            sc.devices[0].position = {uni(-5.0, 5.0), uni(-5.0, 5.0)};
            geometry::Scenario probe = sc;
            try {
                const auto geom = geometry::scene_geometry(probe);
                const auto fix = geometry::locate_bd(
                    geom[0].tau_total + probe.response_delay, geom[0].phi, probe);
                worst = std::max(worst,
                                 std::hypot(fix.x - sc.devices[0].position.x,
                                            fix.y - sc.devices[0].position.y));
                ++tested;
            } catch (const GeometryError&) {
                // Degenerate placement (on top of an array); skip.
            } catch (const ConfigError&) {
            }
        }
        check(tested >= 150 && worst < 1e-9, "geometry-roundtrip",
              std::to_string(tested) + " placements, worst " + format_double(worst) +
                  " m");
    }

    // 3. Closed-form vs numeric bound agreement on randomized scenes.
    {
        std::mt19937_64 rng(4259ULL);
        auto uni = [&rng](double lo, double hi) {
            return lo + (hi - lo) * ((rng() >> 11) + 0.5) * 0x1.0p-53;
        };
        double worst = 0.0;
        for (int rep = 0; rep < 20; ++rep) {
            geometry::Scenario sc = geometry::preset("scenario-1");
            sc.array.num_tx = 2 + static_cast<int>(rng() % 7);
            sc.array.num_rx = 2 + static_cast<int>(rng() % 7);
            // Redraw positions that land on an array or close to endfire of
            // the receiver, where the angle bound diverges and the physical
            // information matrix turns singular.
            for (;;) {
                const geometry::Position p{uni(0.5, 3.0), uni(-2.0, -0.3)};
                const double to_tx = std::hypot(p.x - sc.tx_position.x,
                                                p.y - sc.tx_position.y);
                const double to_rx = std::hypot(p.x - sc.rx_position.x,
                                                p.y - sc.rx_position.y);
                const double phi = std::atan2(p.y - sc.rx_position.y,
                                              p.x - sc.rx_position.x);
                if (to_tx > 0.3 && to_rx > 0.3 && std::abs(std::cos(phi)) > 0.05) {
                    sc.devices[0].position = p;
                    break;
                }
            }
            const auto geom = geometry::scene_geometry(sc);
            const auto mt = static_cast<Eigen::Index>(sc.array.num_tx);
            Eigen::MatrixXcd a(mt, mt);
            for (Eigen::Index r = 0; r < mt; ++r) {
                for (Eigen::Index c = 0; c < mt; ++c) {
                    a(r, c) = std::complex<double>(uni(-1, 1), uni(-1, 1));
                }
            }
            Eigen::MatrixXcd cov =
                a * a.adjoint() +
                1e-3 * Eigen::MatrixXcd::Identity(mt, mt);
            cov *= sc.power_budget / cov.trace().real();
            const auto pc =
                pulses::pulse_constants(cfg.pulse, sc.symbol_duration, 2049);
            const auto report = fim::crb_report(sc, geom, pc, cov);
            worst = std::max(worst, std::abs(report.total - report.numeric_total) /
                                        report.total);
        }
        check(worst < 1e-8, "bound-agreement", "worst relative gap " +
                                                   format_double(worst));
    }

    // 4. Rate consistency: analytic gradient vs finite differences, and the
    //    waveform-level determinant identity.
    {
        geometry::Scenario sc = geometry::preset("scenario-2");
        sc.array.num_tx = 3;
        sc.array.num_rx = 2;
        sc.symbols_per_slot = 4;
        const auto geom = geometry::scene_geometry(sc);
        const auto mt = static_cast<Eigen::Index>(sc.array.num_tx);
        Eigen::MatrixXcd cov = Eigen::MatrixXcd::Identity(mt, mt) *
                               (sc.power_budget / static_cast<double>(mt));
        const Eigen::MatrixXcd grad = rate::sum_rate_gradient(sc, geom, cov);
        const double base = rate::sum_rate(sc, geom, cov);
        const double h = 1e-6 * sc.power_budget;
        Eigen::MatrixXcd bumped = cov;
        bumped(0, 0) += h;
        const double fd = (rate::sum_rate(sc, geom, bumped) - base) / h;
        const bool grad_ok =
            std::abs(grad(0, 0).real() - fd) < 1e-4 * std::max(std::abs(fd), 1e-12);

        const Eigen::MatrixXcd x = sim::sample_excitation(
            cov, sc.symbols_per_slot, 77ULL);
        const auto wave = rate::sum_rate_from_waveform(sc, geom, x);
        const bool wa_ok = std::abs(wave.small_form - wave.big_form) <
                           1e-10 * std::max(1.0, std::abs(wave.big_form));
        check(grad_ok && wa_ok, "rate-consistency",
              "grad fd gap " + format_double(std::abs(grad(0, 0).real() - fd)) +
                  ", det-lift gap " +
                  format_double(std::abs(wave.small_form - wave.big_form)));
    }

    // 5. Derivative-correlation identity, reduced trial count.
    {
        const geometry::Scenario sc = geometry::preset("scenario-1");
        const auto geom = geometry::scene_geometry(sc);
        const auto mt = static_cast<Eigen::Index>(sc.array.num_tx);
        const Eigen::MatrixXcd cov = Eigen::MatrixXcd::Identity(mt, mt) *
                                     (sc.power_budget / static_cast<double>(mt));
        const auto rep = sim::validate_lemma1(sc, geom, cfg.pulse, cov, 0, 0, 2000,
                                              cfg.simulation.seed, 16);
        check(std::abs(rep.ratio - 1.0) < 0.04, "derivative-correlation",
              "ratio " + format_double(rep.ratio));
    }

    // 6. Optimizer sanity at a zero rate floor.
    {
        const auto pc = constants_for(cfg);
        const opt::Solution sol = opt::solve({cfg.scenario, pc, 0.0}, cfg.solver);
        const bool status_ok = sol.status == opt::SolveStatus::kOptimal;
        const bool tight =
            std::abs(sol.objective - sol.crb.total) < 1e-5 * sol.crb.total;
        const bool power_ok =
            pc.avg_power * sol.covariance.trace().real() <=
            cfg.scenario.power_budget * (1.0 + 1e-9);
        check(status_ok && tight && power_ok, "optimizer-sanity",
              "objective " + format_double(sol.objective) + " vs bound " +
                  format_double(sol.crb.total));
    }

    return failures == 0 ? 0 : 4;
}

} // namespace

// ---------------------------------------------------------------------------
// Public functions
// ---------------------------------------------------------------------------

std::string format_double(double value)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

Config config_from_preset(std::string_view name)
{
    Config cfg;
    cfg.scenario = geometry::preset(name);
    cfg.pulse = pulses::make_pulse("g1");
    return cfg;
}

Config parse_config_text(const std::string& text, const std::string& origin)
{
    const auto entries = tokenize_ini(text, origin);

    std::string preset_name = "scenario-1";
    for (const auto& e : entries) {
        if (e.section == "scenario" && e.key == "preset") {
            expect_values(origin, e, 1);
            preset_name = e.values[0];
        }
    }
    Config cfg = config_from_preset(preset_name);

    DeviceDraft draft;
    for (const auto& e : entries) {
        apply_entry(cfg, draft, origin, e);
    }
    finalize_devices(cfg, draft, origin);
    geometry::validate_scenario(cfg.scenario);
    if (cfg.quadrature_points < 64) {
        throw ConfigError(origin + ": quadrature_points must be >= 64");
    }
    if (cfg.gamma_th < 0.0) {
        throw ConfigError(origin + ": gamma_th must be non-negative");
    }
    return cfg;
}

Config load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config file: " + path);
    }
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config_text(text.str(), path);
}

std::string serialize_config(const Config& cfg)
{
    std::ostringstream out;
    const auto& sc = cfg.scenario;
    out << "[scenario]\n";
    out << "tx = " << format_double(sc.tx_position.x) << ' '
        << format_double(sc.tx_position.y) << '\n';
    out << "rx = " << format_double(sc.rx_position.x) << ' '
        << format_double(sc.rx_position.y) << '\n';
    out << "mt = " << sc.array.num_tx << '\n';
    out << "mr = " << sc.array.num_rx << '\n';
    out << "spacing_ratio = " << format_double(sc.array.spacing_ratio) << '\n';
    out << "bd_count = " << sc.devices.size() << '\n';
    for (std::size_t i = 0; i < sc.devices.size(); ++i) {
        const auto& d = sc.devices[i];
        out << "bd" << (i + 1) << " = " << format_double(d.position.x) << ' '
            << format_double(d.position.y) << ' ' << format_double(d.symbol) << ' '
            << format_double(d.reflection_fraction) << '\n';
    }
    out << "\n[physics]\n";
    out << "pathloss_ref = " << format_double(sc.pathloss_ref) << '\n';
    out << "pathloss_exponent = " << format_double(sc.pathloss_exponent) << '\n';
    out << "clutter_power = " << format_double(sc.clutter_power) << '\n';
    out << "noise_power = " << format_double(sc.noise_power) << '\n';
    out << "power_budget = " << format_double(sc.power_budget) << '\n';
    out << "symbol_duration = " << format_double(sc.symbol_duration) << '\n';
    out << "symbols_per_slot = " << sc.symbols_per_slot << '\n';
    out << "response_delay = " << format_double(sc.response_delay) << '\n';
    out << "\n[pulse]\n";
    out << "shape = " << cfg.pulse.name << '\n';
    out << "quadrature_points = " << cfg.quadrature_points << '\n';
    out << "\n[solver]\n";
    out << "mu0 = " << format_double(cfg.solver.mu0) << '\n';
    out << "mu_growth = " << format_double(cfg.solver.mu_growth) << '\n';
    out << "gap_tol = " << format_double(cfg.solver.gap_tol) << '\n';
    out << "newton_tol = " << format_double(cfg.solver.newton_tol) << '\n';
    out << "max_stages = " << cfg.solver.max_stages << '\n';
    out << "max_newton = " << cfg.solver.max_newton << '\n';
    out << "warm_start = " << (cfg.solver.warm_start ? "true" : "false") << '\n';
    out << "verbose = " << (cfg.solver.verbose ? "true" : "false") << '\n';
    out << "gamma_th = " << format_double(cfg.gamma_th) << '\n';
    out << "\n[sweep]\n";
    out << "count = " << cfg.sweep.count << '\n';
    out << "gamma_min = " << format_double(cfg.sweep.gamma_min) << '\n';
    out << "gamma_max = "
        << (cfg.sweep.gamma_max ? format_double(*cfg.sweep.gamma_max)
                                : std::string("auto"))
        << '\n';
    out << "\n[simulation]\n";
    out << "trials = " << cfg.simulation.trials << '\n';
    out << "seed = " << cfg.simulation.seed << '\n';
    out << "power_scale = " << format_double(cfg.simulation.power_scale) << '\n';
    out << "delay_grid = " << format_double(cfg.simulation.delay_grid) << '\n';
    out << "doa_grid = " << format_double(cfg.simulation.doa_grid) << '\n';
    out << "with_noise = " << (cfg.simulation.with_noise ? "true" : "false") << '\n';
    return out.str();
}

std::string describe_output(std::string_view subcommand)
{
    if (subcommand == "crb") {
        return "crb: key=value record of the estimation bounds at the isotropic "
               "full-power covariance R = (P0/(p_g*Mt)) I.\n"
               "  crb_delay_total / crb_doa_total / crb_total: closed-form bound "
               "sums over devices, normalized convention (delay in s^2, angle in "
               "rad^2 via the per-device geometry weights).\n"
               "  *_physical: same totals in the physical-parameter convention "
               "(pulse-derivative cross term instead of the normalized one).\n"
               "  numeric_total(_physical): trace of the dense inverse of the "
               "assembled information matrix (cross-check; equals the closed "
               "form to 1e-8 relative).\n"
               "  convention_gap: |total - total_physical| / max(...).\n"
               "  ill_conditioned: 1 if the information matrix condition number "
               "exceeds 1e12.\n"
               "  crb_delay_bdK / crb_doa_bdK: per-device bounds, normalized "
               "convention.\n";
    }
    if (subcommand == "rate") {
        return "rate: key=value record.\n"
               "  sum_rate_isotropic: sum rate [bits/s/Hz] at the isotropic "
               "full-power covariance.\n"
               "  gamma_max: maximum achievable sum rate under the power budget "
               "(interior-point certificate).\n";
    }
    if (subcommand == "optimize") {
        return "optimize: key=value record of one covariance design.\n"
               "  status: optimal | infeasible | max-iterations (exit code 3 when "
               "infeasible).\n"
               "  gamma_th / gamma_max: requested rate floor and the probe "
               "certificate.\n"
               "  achieved_rate: sum rate at the returned covariance.\n"
               "  objective: sum_l(1/omega_l + 1/nu_l); equals crb_total at "
               "optimality.\n"
               "  crb_*: bounds at the returned covariance (see crb record).\n"
               "  boundary_relaxed: 1 if gamma_th sat within 1e-9 relative of "
               "gamma_max and was relaxed.\n"
               "  covariance_trace / min_eig_covariance / power_slack / "
               "rate_slack / min_lmi_eig: feasibility diagnostics.\n"
               "  stages / newton_iterations: interior-point effort.\n";
    }
    if (subcommand == "sweep") {
        return "sweep: CSV with header gamma_th,crb_total,crb_delay,crb_doa,"
               "achieved_rate,status,seconds.\n"
               "  gamma_th: rate floor of the grid point [bits/s/Hz].\n"
               "  crb_total = crb_delay + crb_doa: minimized bound (normalized "
               "convention; s^2 + rad^2).\n"
               "  achieved_rate: sum rate at the optimizer's covariance (0 for "
               "infeasible points).\n"
               "  status: optimal | boundary-relaxed | infeasible | "
               "max-iterations.\n"
               "  seconds: wall-clock solve time (the one non-deterministic "
               "column).\n";
    }
    if (subcommand == "simulate") {
        return "simulate: single-row CSV with header trials,mse_delay,mse_doa,"
               "bias_delay,bias_doa,crb_delay,crb_doa,crb_delay_physical,"
               "crb_doa_physical,ratio_doa_physical,power_scale,seed.\n"
               "  mse_*: Monte-Carlo mean squared estimation errors of the "
               "grid-search ML estimator (delay vs grid-quantized truth).\n"
               "  crb_*: closed-form bounds at the same covariance, both "
               "conventions.\n"
               "  ratio_doa_physical: mse_doa / crb_doa_physical (the estimator "
               "benchmark figure).\n";
    }
    if (subcommand == "validate") {
        return "validate: one 'PASS name (detail)' or 'FAIL name (detail)' line "
               "per self-check (pulse constants, geometry roundtrip, bound "
               "agreement, rate consistency, derivative correlation, optimizer "
               "sanity); exit code 4 if any check fails.\n";
    }
    throw ConfigError("unknown subcommand: " + std::string(subcommand));
}

int run_command(const std::vector<std::string>& args, std::ostream& out,
                std::ostream& err)
{
    try {
        CLI::App app{"backscatter integrated sensing and communication designer"};
        app.name("bsisac");
        std::string config_path, preset_name, pulse_name, out_path;
        double gamma_th = -1.0, power_dbm = 0.0, power_scale = 0.0;
        double gap_tol = 0.0, newton_tol = 0.0, mu_growth = 0.0;
        int mt = 0, mr = 0, trials = 0, max_stages = 0, oversampling = 0;
        std::uint64_t seed = 0;
        bool describe = false, no_warm = false, verbose = false;

        app.add_option("--config", config_path, "Configuration file (INI)");
        app.add_option("--preset", preset_name,
                       "Scenario preset: scenario-1 | scenario-2");
        app.add_option("--pulse", pulse_name, "Pulse shape: g1 | g2 | g3");
        auto* gamma_opt =
            app.add_option("--gamma-th", gamma_th, "Rate floor [bits/s/Hz]");
        auto* power_opt =
            app.add_option("--power-dbm", power_dbm, "Power budget [dBm]");
        auto* mt_opt = app.add_option("--mt", mt, "Transmit elements");
        auto* mr_opt = app.add_option("--mr", mr, "Receive elements");
        auto* seed_opt = app.add_option("--seed", seed, "Monte-Carlo master seed");
        auto* trials_opt = app.add_option("--trials", trials, "Monte-Carlo trials");
        auto* scale_opt = app.add_option("--power-scale", power_scale,
                                         "Simulation power multiplier");
        auto* os_opt = app.add_option("--oversampling", oversampling,
                                      "Simulation samples per symbol");
        app.add_option("--out", out_path, "Write records/CSV to a file");
        app.add_flag("--describe-output", describe,
                     "Print the output schema of the subcommand and exit");
        auto* gap_opt = app.add_option("--gap-tol", gap_tol, "Solver gap tolerance");
        auto* newton_opt =
            app.add_option("--newton-tol", newton_tol, "Newton decrement tolerance");
        auto* stages_opt =
            app.add_option("--max-stages", max_stages, "Barrier stage cap");
        auto* growth_opt =
            app.add_option("--mu-growth", mu_growth, "Barrier growth factor");
        app.add_flag("--no-warm-start", no_warm, "Disable sweep warm starts");
        app.add_flag("--verbose", verbose, "Per-stage solver progress on stderr");

        // Options live on the parent so they are shared; fallthrough lets
        // them appear after the subcommand name as well.
        app.add_subcommand("crb", "Estimation bounds at the reference covariance")
            ->fallthrough();
        app.add_subcommand("rate", "Sum rate and the max-rate certificate")
            ->fallthrough();
        app.add_subcommand("optimize", "Bound-minimizing covariance design")
            ->fallthrough();
        app.add_subcommand("sweep", "Bound-vs-rate trade-off CSV")->fallthrough();
        app.add_subcommand("simulate", "Monte-Carlo estimator-vs-bound CSV")
            ->fallthrough();
        app.add_subcommand("validate", "Library self-checks")->fallthrough();
        app.require_subcommand(0, 1);

        std::vector<const char*> argv;
        argv.reserve(args.size() + 1);
        argv.push_back("bsisac");
        for (const auto& a : args) argv.push_back(a.c_str());
        try {
            app.parse(static_cast<int>(argv.size()), argv.data());
        } catch (const CLI::CallForHelp&) {
            out << app.help();
            return 0;
        } catch (const CLI::ParseError& e) {
            err << "argument error: " << e.what() << '\n';
            return 2;
        }

        const auto subs = app.get_subcommands();
        if (subs.empty()) {
            err << app.help();
            return 2;
        }
        const std::string sub = subs.front()->get_name();

        if (describe) {
            out << describe_output(sub);
            return 0;
        }

        if (!config_path.empty() && !preset_name.empty()) {
            throw ConfigError("--config and --preset are mutually exclusive");
        }
        Config cfg = !config_path.empty()
                         ? load_config(config_path)
                         : config_from_preset(
                               preset_name.empty() ? "scenario-1" : preset_name);

        if (!pulse_name.empty()) cfg.pulse = pulses::make_pulse(pulse_name);
        if (gamma_opt->count() > 0) {
            if (gamma_th < 0.0) throw ConfigError("gamma_th must be non-negative");
            cfg.gamma_th = gamma_th;
        }
        if (power_opt->count() > 0) cfg.scenario.power_budget = dbm_to_watts(power_dbm);
        if (mt_opt->count() > 0) cfg.scenario.array.num_tx = mt;
        if (mr_opt->count() > 0) cfg.scenario.array.num_rx = mr;
        if (seed_opt->count() > 0) cfg.simulation.seed = seed;
        if (trials_opt->count() > 0) cfg.simulation.trials = trials;
        if (scale_opt->count() > 0) cfg.simulation.power_scale = power_scale;
        if (os_opt->count() > 0) {
            if (oversampling < 1) throw ConfigError("oversampling must be >= 1");
            cfg.simulation.delay_grid =
                cfg.scenario.symbol_duration / static_cast<double>(oversampling);
        }
        if (gap_opt->count() > 0) cfg.solver.gap_tol = gap_tol;
        if (newton_opt->count() > 0) cfg.solver.newton_tol = newton_tol;
        if (stages_opt->count() > 0) cfg.solver.max_stages = max_stages;
        if (growth_opt->count() > 0) cfg.solver.mu_growth = mu_growth;
        if (no_warm) cfg.solver.warm_start = false;
        if (verbose) cfg.solver.verbose = true;
        geometry::validate_scenario(cfg.scenario);

        std::ofstream file_out;
        std::ostream* sink = &out;
        if (!out_path.empty()) {
            file_out.open(out_path);
            if (!file_out) {
                throw ConfigError("cannot open output file: " + out_path);
            }
            sink = &file_out;
        }

        if (sub == "crb") {
            emit_crb_record(cfg, *sink);
            return 0;
        }
        if (sub == "rate") {
            emit_rate_record(cfg, *sink);
            return 0;
        }
        if (sub == "optimize") {
            return emit_optimize_record(cfg, *sink);
        }
        if (sub == "sweep") {
            emit_sweep_csv(cfg, *sink);
            return 0;
        }
        if (sub == "simulate") {
            emit_simulate_csv(cfg, *sink);
            return 0;
        }
        if (sub == "validate") {
            return run_validate(cfg, *sink);
        }
        err << "unknown subcommand: " << sub << '\n';
        return 2;
    } catch (const ConfigError& e) {
        err << "configuration error: " << e.what() << '\n';
        return 2;
    } catch (const InfeasibleError& e) {
        err << "infeasible: " << e.what() << '\n';
        return 3;
    } catch (const ValidationError& e) {
        err << "validation error: " << e.what() << '\n';
        return 4;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
}

} // namespace bsisac::io

// acceptance_main.cpp
// End-to-end acceptance suite: one self-contained check per shipped claim,
// printed as a single PASS/FAIL line each.  Check 11 is statistical
// (estimator efficiency) and reports WARN instead of failing the binary.
//
// Tolerances are pinned here, next to the checks they guard.
//
// SPDX-License-Identifier: MIT
// Copyright (c) 2026 bsisac contributors. See LICENSE for details.

#include <Eigen/Dense>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <functional>
#include <iostream>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "bsisac/errors.hpp"
#include "bsisac/fim_crb.hpp"
#include "bsisac/geometry.hpp"
#include "bsisac/optimizer.hpp"
#include "bsisac/pulses.hpp"
#include "bsisac/rate.hpp"
#include "bsisac/simulate.hpp"

using namespace bsisac;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start)
{
    return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
    bool pass = false;
    bool soft = false; // WARN instead of FAIL
    std::string detail;
};

std::string fmt(double v)
{
    std::ostringstream ss;
    ss.precision(6);
    ss << v;
    return ss.str();
}

// --- shared randomized-scene suite (checks 1 and 2) ------------------------

struct RandomScene {
    geometry::Scenario scenario;
    Eigen::MatrixXcd covariance;
    pulses::PulseConstants constants;
};

std::vector<RandomScene> make_random_suite(int count)
{
    std::mt19937_64 eng(20260825ULL);
    std::uniform_real_distribution<double> coord(-4.0, 4.0);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const int device_counts[] = {1, 2, 4};
    const int array_sizes[] = {2, 4, 8};
    const char* pulse_names[] = {"g1", "g2", "g3"};

    std::vector<RandomScene> suite;
    suite.reserve(static_cast<std::size_t>(count));
    while (static_cast<int>(suite.size()) < count) {
        RandomScene scene;
        scene.scenario = geometry::preset("scenario-1");
        auto& sc = scene.scenario;
        const int idx = static_cast<int>(suite.size());
        const int n_dev = device_counts[idx % 3];
        sc.array.num_tx = array_sizes[eng() % 3];
        sc.array.num_rx = array_sizes[eng() % 3];
        sc.devices.clear();

        bool usable = true;
        for (int l = 0; l < n_dev; ++l) {
            geometry::Position p{coord(eng), coord(eng)};
            const double to_tx = std::hypot(p.x - sc.tx_position.x,
                                            p.y - sc.tx_position.y);
            const double to_rx = std::hypot(p.x - sc.rx_position.x,
                                            p.y - sc.rx_position.y);
            const double phi =
                std::atan2(p.y - sc.rx_position.y, p.x - sc.rx_position.x);
            // Keep the suite away from geometric degeneracies: co-located
            // nodes and near-endfire arrivals (diverging angle weight).
            if (to_tx < 0.3 || to_rx < 0.3 || std::abs(std::cos(phi)) < 0.05) {
                usable = false;
                break;
            }
            sc.devices.push_back({p, 1.0, 1.0});
        }
        if (!usable) continue;

        const int mt = sc.array.num_tx;
        Eigen::MatrixXcd a(mt, mt);
        for (int i = 0; i < mt; ++i)
            for (int j = 0; j < mt; ++j) a(i, j) = {gauss(eng), gauss(eng)};
        scene.covariance = a * a.adjoint() / static_cast<double>(mt) +
                           0.05 * Eigen::MatrixXcd::Identity(mt, mt);
        scene.constants = pulses::pulse_constants(
            pulses::make_pulse(pulse_names[idx % 3]), sc.symbol_duration);
        suite.push_back(std::move(scene));
    }
    return suite;
}

// --- check implementations --------------------------------------------------

/// 1: closed-form bounds equal the dense FIM inverse in the same convention,
///    1e-8 relative, over 100 randomized scenes, in under 10 seconds.
Outcome check_closed_form_vs_dense(const std::vector<RandomScene>& suite)
{
    const auto start = Clock::now();
    double worst = 0.0;
    for (const auto& scene : suite) {
        const auto geom = geometry::scene_geometry(scene.scenario);
        const auto rep = fim::crb_report(scene.scenario, geom, scene.constants,
                                         scene.covariance);
        worst = std::max(worst,
                         std::abs(rep.total - rep.numeric_total) / rep.total);
        worst = std::max(worst, std::abs(rep.total_physical -
                                         rep.numeric_total_physical) /
                                    rep.total_physical);
    }
    const double elapsed = seconds_since(start);
    Outcome o;
    o.pass = worst <= 1e-8 && elapsed < 10.0;
    o.detail = "worst relative gap " + fmt(worst) + " over " +
               std::to_string(suite.size()) + " scenes in " + fmt(elapsed) + " s";
    return o;
}

/// 2: the 2x2-block inversion path matches the dense inverse, 1e-8 relative,
///    on the same suite (both conventions).
Outcome check_block_vs_dense(const std::vector<RandomScene>& suite)
{
    double worst = 0.0;
    for (const auto& scene : suite) {
        const auto geom = geometry::scene_geometry(scene.scenario);
        const auto blocks = fim::build_fim(scene.scenario, geom, scene.constants,
                                           scene.covariance);
        for (const auto* m : {&blocks.assembled, &blocks.assembled_physical}) {
            const auto inv = fim::crb_numeric(*m);
            worst = std::max(worst, std::abs(inv.total_block - inv.total_dense) /
                                        inv.total_dense);
            worst = std::max(
                worst, (inv.diagonal_block - inv.diagonal_dense).cwiseAbs().maxCoeff() /
                           inv.diagonal_dense.cwiseAbs().maxCoeff());
        }
    }
    Outcome o;
    o.pass = worst <= 1e-8;
    o.detail = "worst relative gap " + fmt(worst) + " over " +
               std::to_string(suite.size()) + " scenes, both conventions";
    return o;
}

/// 3: the empirical derivative correlation matches its prediction: the
///    same-device value within 2% of eps_g*msb*N*dt*Tr(HRH^H) over 1e4
///    trials, the cross-device value within 3 standard errors of zero,
///    in under 60 seconds.
Outcome check_derivative_correlation()
{
    const auto start = Clock::now();
    const auto sc = geometry::preset("scenario-1");
    const auto geom = geometry::scene_geometry(sc);
    const int mt = sc.array.num_tx;
    const Eigen::MatrixXcd cov =
        Eigen::MatrixXcd::Identity(mt, mt) * (sc.power_budget / mt);
    const auto same = sim::validate_lemma1(sc, geom, pulses::make_pulse("g1"),
                                           cov, 0, 0, 10000, 8811, 16);

    auto sc2 = sc;
    sc2.devices.push_back({{1.0, -1.0}, 1.0, 1.0});
    const auto geom2 = geometry::scene_geometry(sc2);
    const auto cross = sim::validate_lemma1(
        sc2, geom2, pulses::make_pulse("g1"), cov, 0, 1, 10000, 8812, 16,
        std::vector<double>{0.0, sc.symbol_duration});

    const double elapsed = seconds_since(start);
    const bool same_ok = std::abs(same.ratio - 1.0) <= 0.02;
    const bool cross_ok = std::abs(cross.empirical) <= 3.0 * cross.standard_error;
    Outcome o;
    o.pass = same_ok && cross_ok && elapsed < 60.0;
    o.detail = "same-device ratio " + fmt(same.ratio) + " (predicted " +
               fmt(same.predicted) + "), cross-device " + fmt(cross.empirical) +
               " vs SE " + fmt(cross.standard_error) + ", " + fmt(elapsed) + " s";
    return o;
}

/// 4: bounds scale exactly inversely with the covariance (1e-9 relative for
///    x0.5, x2, x10) and the optimized objective transfers the same way
///    across a 10x power change within 1%.
Outcome check_scaling_invariance()
{
    const auto sc = geometry::preset("scenario-1");
    const auto geom = geometry::scene_geometry(sc);
    const auto pc = pulses::pulse_constants(pulses::make_pulse("g1"),
                                            sc.symbol_duration);
    const int mt = sc.array.num_tx;
    const Eigen::MatrixXcd base =
        Eigen::MatrixXcd::Identity(mt, mt) * (sc.power_budget / mt);
    const auto r0 = fim::crb_report(sc, geom, pc, base);
    double worst = 0.0;
    for (double c : {0.5, 2.0, 10.0}) {
        const auto rc = fim::crb_report(sc, geom, pc, (c * base).eval());
        worst = std::max(worst, std::abs(rc.total * c - r0.total) / r0.total);
        worst = std::max(worst, std::abs(rc.total_physical * c -
                                         r0.total_physical) /
                                    r0.total_physical);
    }

    auto hi = sc;
    hi.power_budget = 10.0 * sc.power_budget;
    const auto sol_lo = opt::solve({sc, pc, 0.0});
    const auto sol_hi = opt::solve({hi, pc, 0.0});
    const double transfer =
        std::abs(sol_hi.objective * 10.0 - sol_lo.objective) / sol_lo.objective;

    Outcome o;
    o.pass = worst <= 1e-9 && transfer <= 0.01;
    o.detail = "closed-form scaling gap " + fmt(worst) +
               ", optimizer 10x transfer gap " + fmt(transfer);
    return o;
}

/// 5: the interior-point design matches exhaustive grid search within 1e-4
///    relative, for one and two transmit antennas (single device).
Outcome check_against_grid_search()
{
    Outcome o;

    // One antenna: the covariance is a single real power level.
    auto sc1 = geometry::preset("scenario-1");
    sc1.array.num_tx = 1;
    const auto pc = pulses::pulse_constants(pulses::make_pulse("g1"),
                                            sc1.symbol_duration);
    const auto geom1 = geometry::scene_geometry(sc1);
    double best1 = std::numeric_limits<double>::infinity();
    const int n1 = 10000;
    for (int i = 1; i <= n1; ++i) {
        const double r = sc1.power_budget / pc.avg_power *
                         static_cast<double>(i) / static_cast<double>(n1);
        Eigen::MatrixXcd cov(1, 1);
        cov(0, 0) = r;
        const auto blocks = fim::build_fim(sc1, geom1, pc, cov);
        const auto rep = fim::crb_closed_form(blocks, pc, geom1);
        best1 = std::min(best1, rep.total);
    }
    const auto sol1 = opt::solve({sc1, pc, 0.0});
    const double gap1 = std::abs(sol1.objective - best1) / best1;

    // Two antennas: trace split t, off-diagonal magnitude fraction rho,
    // phase aligned with the transmit steering direction (the optimal phase
    // for a rank-deficient maximizer; the optimum t=1/2, rho=1 lies on-grid).
    auto sc2 = geometry::preset("scenario-1");
    sc2.array.num_tx = 2;
    const auto geom2 = geometry::scene_geometry(sc2);
    const auto at = geometry::steering_tx(geom2[0].theta, 2,
                                          sc2.array.spacing_ratio);
    const std::complex<double> align =
        std::exp(std::complex<double>(0.0, std::arg(at(1))));
    double best2 = std::numeric_limits<double>::infinity();
    const int n2 = 101;
    const double budget = sc2.power_budget / pc.avg_power;
    for (int it = 0; it <= n2 - 1; ++it) {
        const double t = static_cast<double>(it) / static_cast<double>(n2 - 1);
        for (int ir = 0; ir <= n2 - 1; ++ir) {
            const double rho =
                static_cast<double>(ir) / static_cast<double>(n2 - 1);
            Eigen::MatrixXcd cov(2, 2);
            const double off = rho * std::sqrt(t * (1.0 - t));
            cov(0, 0) = budget * t;
            cov(1, 1) = budget * (1.0 - t);
            cov(0, 1) = budget * off * align;
            cov(1, 0) = std::conj(cov(0, 1));
            fim::CrbReport rep;
            try {
                const auto blocks = fim::build_fim(sc2, geom2, pc, cov);
                rep = fim::crb_closed_form(blocks, pc, geom2);
            } catch (const NumericalError&) {
                continue; // singular information at degenerate grid corners
            }
            best2 = std::min(best2, rep.total);
        }
    }
    const auto sol2 = opt::solve({sc2, pc, 0.0});
    const double gap2 = std::abs(sol2.objective - best2) / best2;

    o.pass = gap1 <= 1e-4 && gap2 <= 1e-4;
    o.detail = "one-antenna gap " + fmt(gap1) + " (grid " + fmt(best1) +
               "), two-antenna gap " + fmt(gap2) + " (grid " + fmt(best2) + ")";
    return o;
}

/// 6: a 15-point rate-floor sweep over [0, 1.1*gamma_max] is non-decreasing
///    in the bound, flat over the feasible head (single device: the bound
///    and the rate are maximized by the same beamformer), and infeasible at
///    exactly the two overshooting points.
Outcome check_tradeoff_sweep()
{
    const auto sc = geometry::preset("scenario-1");
    const auto pc = pulses::pulse_constants(pulses::make_pulse("g1"),
                                            sc.symbol_duration);
    const opt::TradeoffProblem problem{sc, pc, 0.0};
    const auto probe = opt::feasibility_probe(problem);
    const auto grid = opt::auto_gamma_grid(probe.gamma_max, 15);
    const auto pts = opt::sweep(problem, grid);

    bool statuses_ok = pts.size() == 15;
    for (int k = 0; k < 13 && statuses_ok; ++k)
        statuses_ok = pts[static_cast<std::size_t>(k)].status ==
                      opt::SolveStatus::kOptimal;
    for (int k = 13; k < 15 && statuses_ok; ++k)
        statuses_ok = pts[static_cast<std::size_t>(k)].status ==
                      opt::SolveStatus::kInfeasible;

    bool monotone = true;
    double head_min = std::numeric_limits<double>::infinity();
    double head_max = 0.0;
    for (int k = 0; k < 13; ++k) {
        const double v = pts[static_cast<std::size_t>(k)].crb_total;
        head_min = std::min(head_min, v);
        head_max = std::max(head_max, v);
        if (k > 0 &&
            v < pts[static_cast<std::size_t>(k - 1)].crb_total * (1.0 - 1e-5)) {
            monotone = false;
        }
    }
    const double flatness = (head_max - head_min) / head_min;

    Outcome o;
    o.pass = statuses_ok && monotone && flatness <= 1e-4;
    o.detail = std::string("statuses ") + (statuses_ok ? "ok" : "broken") +
               ", monotone " + (monotone ? "yes" : "no") + ", head spread " +
               fmt(flatness);
    return o;
}

/// 7: at half the maximum rate, the optimized bound orders the pulses
///    g1 <= g2 <= g3, and the per-pulse rate certificates agree to 1e-6
///    relative (unit-power pulses share the same rate problem).
Outcome check_pulse_ordering()
{
    const auto sc = geometry::preset("scenario-1");
    double totals[3] = {0.0, 0.0, 0.0};
    double certs[3] = {0.0, 0.0, 0.0};
    const char* names[3] = {"g1", "g2", "g3"};
    for (int i = 0; i < 3; ++i) {
        const auto pc = pulses::pulse_constants(pulses::make_pulse(names[i]),
                                                sc.symbol_duration);
        const opt::TradeoffProblem base{sc, pc, 0.0};
        certs[i] = opt::feasibility_probe(base).gamma_max;
        const auto sol = opt::solve({sc, pc, 0.5 * certs[i]});
        totals[i] = sol.crb.total;
    }
    const double cert_spread =
        (std::max({certs[0], certs[1], certs[2]}) -
         std::min({certs[0], certs[1], certs[2]})) /
        certs[0];
    const bool ordered = totals[0] <= totals[1] * (1.0 + 1e-6) &&
                         totals[1] <= totals[2] * (1.0 + 1e-6);
    Outcome o;
    o.pass = ordered && cert_spread <= 1e-6;
    o.detail = "bounds " + fmt(totals[0]) + " <= " + fmt(totals[1]) +
               " <= " + fmt(totals[2]) + ", certificate spread " +
               fmt(cert_spread);
    return o;
}

/// 8: each 10 dB of transmit power cuts the optimized bound by 10x
///    (within +-20%).
Outcome check_power_scaling()
{
    const auto base = geometry::preset("scenario-1");
    const auto pc = pulses::pulse_constants(pulses::make_pulse("g1"),
                                            base.symbol_duration);
    double objective[3];
    const double dbm[3] = {10.0, 20.0, 30.0};
    for (int i = 0; i < 3; ++i) {
        auto sc = base;
        sc.power_budget = std::pow(10.0, dbm[i] / 10.0) / 1000.0;
        objective[i] = opt::solve({sc, pc, 0.0}).objective;
    }
    const double step1 = objective[0] / objective[1];
    const double step2 = objective[1] / objective[2];
    Outcome o;
    o.pass = step1 >= 8.0 && step1 <= 12.0 && step2 >= 8.0 && step2 <= 12.0;
    o.detail = "10->20 dBm factor " + fmt(step1) + ", 20->30 dBm factor " +
               fmt(step2);
    return o;
}

/// 9: growing the receive array helps more than growing the transmit array:
///    from 4x4, doubling M_r divides the optimized bound by ~9.7 while
///    doubling M_t divides it by ~2.
Outcome check_array_asymmetry()
{
    const auto base = geometry::preset("scenario-1");
    const auto pc = pulses::pulse_constants(pulses::make_pulse("g1"),
                                            base.symbol_duration);
    auto solve_size = [&](int mt, int mr) {
        auto sc = base;
        sc.array.num_tx = mt;
        sc.array.num_rx = mr;
        return opt::solve({sc, pc, 0.0}).objective;
    };
    const double r44 = solve_size(4, 4);
    const double r48 = solve_size(4, 8);
    const double r84 = solve_size(8, 4);
    const double rx_factor = r44 / r48;
    const double tx_factor = r44 / r84;
    Outcome o;
    o.pass = rx_factor > tx_factor && std::abs(rx_factor - 9.687) <= 0.5 &&
             std::abs(tx_factor - 2.0) <= 0.1;
    o.detail = "receive doubling x" + fmt(rx_factor) + ", transmit doubling x" +
               fmt(tx_factor);
    return o;
}

/// 10: the closed-form localization inverse reconstructs 1000 random
///     non-degenerate device placements to better than 1e-9 m from noiseless
///     delay/angle pairs.
Outcome check_localization_roundtrip()
{
    auto sc = geometry::preset("scenario-1");
    std::mt19937_64 eng(424242ULL);
    std::uniform_real_distribution<double> coord(-5.0, 5.0);
    int tested = 0;
    int attempts = 0;
    double worst = 0.0;
    while (tested < 1000 && attempts < 20000) {
        ++attempts;
        sc.devices[0].position = {coord(eng), coord(eng)};
        try {
            const auto geom = geometry::scene_geometry(sc);
            const auto fix =
                geometry::locate_bd(geom[0].tau_total, geom[0].phi, sc);
            const double err = std::hypot(fix.x - sc.devices[0].position.x,
                                          fix.y - sc.devices[0].position.y);
            worst = std::max(worst, err);
            ++tested;
        } catch (const GeometryError&) {
            continue; // co-located draw; not a valid placement
        }
    }
    Outcome o;
    o.pass = tested == 1000 && worst < 1e-9;
    o.detail = "worst position error " + fmt(worst) + " m over " +
               std::to_string(tested) + " placements";
    return o;
}

/// 11 (statistical, warn-only): at 1000x power the grid-search ML estimator's
///     DoA mean squared error lies between the physical-convention bound and
///     10x that bound over 500 trials.  Grid-search quantization inflates the
///     error ~3.3x above the bound, so the band is comfortably bracketed in
///     expectation, but any finite Monte-Carlo run can stray; a miss warns
///     rather than fails.
Outcome check_estimator_efficiency()
{
    const auto sc = geometry::preset("scenario-1");
    sim::SimulationRun run;
    run.trials = 500;
    run.seed = 20260825ULL;
    run.power_scale = 1000.0;
    const auto rep = sim::mse_vs_crb(sc, pulses::make_pulse("g1"), run);
    Outcome o;
    o.soft = true;
    o.pass = rep.mse_doa >= rep.crb_doa_physical &&
             rep.mse_doa <= 10.0 * rep.crb_doa_physical;
    o.detail = "MSE(DoA) " + fmt(rep.mse_doa) + ", physical bound " +
               fmt(rep.crb_doa_physical) + ", ratio " +
               fmt(rep.ratio_doa_physical) + " (band [1, 10])";
    return o;
}

} // namespace

int main()
{
    std::vector<RandomScene> suite;
    try {
        suite = make_random_suite(100);
    } catch (const std::exception& e) {
        std::cout << "FAIL criterion-1: could not build the randomized suite ("
                  << e.what() << ")\n";
        std::cout << "FAIL criterion-2: could not build the randomized suite ("
                  << e.what() << ")\n";
        return 1;
    }

    int failures = 0;
    auto report = [&failures](int id, const Outcome& o) {
        const char* verdict = o.pass ? "PASS" : (o.soft ? "WARN" : "FAIL");
        std::cout << verdict << " criterion-" << id << ": " << o.detail << '\n';
        std::cout.flush();
        if (!o.pass && !o.soft) ++failures;
    };

    auto guarded = [](const std::function<Outcome()>& fn) {
        try {
            return fn();
        } catch (const std::exception& e) {
            Outcome o;
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
            return o;
        }
    };

    report(1, guarded([&] { return check_closed_form_vs_dense(suite); }));
    report(2, guarded([&] { return check_block_vs_dense(suite); }));
    report(3, guarded(check_derivative_correlation));
    report(4, guarded(check_scaling_invariance));
    report(5, guarded(check_against_grid_search));
    report(6, guarded(check_tradeoff_sweep));
    report(7, guarded(check_pulse_ordering));
    report(8, guarded(check_power_scaling));
    report(9, guarded(check_array_asymmetry));
    report(10, guarded(check_localization_roundtrip));
    {
        auto o = guarded(check_estimator_efficiency);
        o.soft = true; // statistical band: warn-only by design
        report(11, o);
    }

    if (failures > 0) {
        std::cout << failures << " criteria failed\n";
        return 1;
    }
    std::cout << "all criteria passed\n";
    return 0;
}

// py_module.cpp
// pybind11 bindings for the bsisac core library.  Pulse shapes are selected
// by name ("g1" | "g2" | "g3") at this layer; everything numeric crosses the
// boundary as NumPy arrays via the Eigen caster.
//
// SPDX-License-Identifier: MIT
// Copyright (c) 2026 bsisac contributors. See LICENSE for details.

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "bsisac/cli_io.hpp"
#include "bsisac/errors.hpp"
#include "bsisac/fim_crb.hpp"
#include "bsisac/geometry.hpp"
#include "bsisac/optimizer.hpp"
#include "bsisac/pulses.hpp"
#include "bsisac/rate.hpp"
#include "bsisac/simulate.hpp"

namespace py = pybind11;

using namespace bsisac;

namespace {

opt::TradeoffProblem make_problem(const geometry::Scenario& scenario,
                                  const std::string& pulse_name, double gamma_th,
                                  int quadrature_points)
{
    const pulses::PulseShape shape = pulses::make_pulse(pulse_name);
    return {scenario,
            pulses::pulse_constants(shape, scenario.symbol_duration, quadrature_points),
            gamma_th};
}

} // namespace

PYBIND11_MODULE(_core, m)
{
    m.doc() = "Backscatter integrated sensing and communication core";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<GeometryError>(m, "GeometryError", PyExc_ValueError);
    py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

    py::class_<geometry::Position>(m, "Position")
        .def(py::init<>())
        .def(py::init([](double x, double y) {
                 return geometry::Position{x, y};
             }),
             py::arg("x"), py::arg("y"))
        .def_readwrite("x", &geometry::Position::x)
        .def_readwrite("y", &geometry::Position::y);

    py::class_<geometry::ArrayConfig>(m, "ArrayConfig")
        .def(py::init<>())
        .def_readwrite("num_tx", &geometry::ArrayConfig::num_tx)
        .def_readwrite("num_rx", &geometry::ArrayConfig::num_rx)
        .def_readwrite("spacing_ratio", &geometry::ArrayConfig::spacing_ratio);

    py::class_<geometry::BackscatterDevice>(m, "BackscatterDevice")
        .def(py::init<>())
        .def_readwrite("position", &geometry::BackscatterDevice::position)
        .def_readwrite("symbol", &geometry::BackscatterDevice::symbol)
        .def_readwrite("reflection_fraction",
                       &geometry::BackscatterDevice::reflection_fraction);

    py::class_<geometry::Scenario>(m, "Scenario")
        .def(py::init<>())
        .def_readwrite("tx_position", &geometry::Scenario::tx_position)
        .def_readwrite("rx_position", &geometry::Scenario::rx_position)
        .def_readwrite("array", &geometry::Scenario::array)
        .def_readwrite("devices", &geometry::Scenario::devices)
        .def_readwrite("pathloss_ref", &geometry::Scenario::pathloss_ref)
        .def_readwrite("pathloss_exponent", &geometry::Scenario::pathloss_exponent)
        .def_readwrite("clutter_power", &geometry::Scenario::clutter_power)
        .def_readwrite("noise_power", &geometry::Scenario::noise_power)
        .def_readwrite("symbol_duration", &geometry::Scenario::symbol_duration)
        .def_readwrite("symbols_per_slot", &geometry::Scenario::symbols_per_slot)
        .def_readwrite("response_delay", &geometry::Scenario::response_delay)
        .def_readwrite("power_budget", &geometry::Scenario::power_budget)
        .def("total_noise", &geometry::Scenario::total_noise);

    py::class_<geometry::BdGeometry>(m, "BdGeometry")
        .def_readonly("d_t", &geometry::BdGeometry::d_t)
        .def_readonly("d_r", &geometry::BdGeometry::d_r)
        .def_readonly("d_0", &geometry::BdGeometry::d_0)
        .def_readonly("theta", &geometry::BdGeometry::theta)
        .def_readonly("phi", &geometry::BdGeometry::phi)
        .def_readonly("beta", &geometry::BdGeometry::beta)
        .def_readonly("tau_total", &geometry::BdGeometry::tau_total)
        .def_readonly("alpha", &geometry::BdGeometry::alpha)
        .def_readonly("delay_index", &geometry::BdGeometry::delay_index)
        .def_readonly("channel", &geometry::BdGeometry::channel);

    py::class_<geometry::PositionFix>(m, "PositionFix")
        .def_readonly("d_r", &geometry::PositionFix::d_r)
        .def_readonly("x", &geometry::PositionFix::x)
        .def_readonly("y", &geometry::PositionFix::y)
        .def_readonly("theta", &geometry::PositionFix::theta);

    py::class_<pulses::PulseConstants>(m, "PulseConstants")
        .def_readonly("avg_power", &pulses::PulseConstants::avg_power)
        .def_readonly("energy", &pulses::PulseConstants::energy)
        .def_readonly("msb", &pulses::PulseConstants::msb)
        .def_readonly("deriv_overlap", &pulses::PulseConstants::deriv_overlap)
        .def_readonly("dt", &pulses::PulseConstants::dt);

    py::class_<fim::CrbReport>(m, "CrbReport")
        .def_readonly("delay_per_bd", &fim::CrbReport::delay_per_bd)
        .def_readonly("doa_per_bd", &fim::CrbReport::doa_per_bd)
        .def_readonly("delay_total", &fim::CrbReport::delay_total)
        .def_readonly("doa_total", &fim::CrbReport::doa_total)
        .def_readonly("total", &fim::CrbReport::total)
        .def_readonly("delay_per_bd_physical", &fim::CrbReport::delay_per_bd_physical)
        .def_readonly("doa_per_bd_physical", &fim::CrbReport::doa_per_bd_physical)
        .def_readonly("delay_total_physical", &fim::CrbReport::delay_total_physical)
        .def_readonly("doa_total_physical", &fim::CrbReport::doa_total_physical)
        .def_readonly("total_physical", &fim::CrbReport::total_physical)
        .def_readonly("numeric_total", &fim::CrbReport::numeric_total)
        .def_readonly("numeric_total_physical",
                      &fim::CrbReport::numeric_total_physical)
        .def_readonly("convention_gap", &fim::CrbReport::convention_gap)
        .def_readonly("cross_term_ambiguity", &fim::CrbReport::cross_term_ambiguity)
        .def_readonly("ill_conditioned", &fim::CrbReport::ill_conditioned);

    py::class_<opt::SolverOptions>(m, "SolverOptions")
        .def(py::init<>())
        .def_readwrite("mu0", &opt::SolverOptions::mu0)
        .def_readwrite("mu_growth", &opt::SolverOptions::mu_growth)
        .def_readwrite("gap_tol", &opt::SolverOptions::gap_tol)
        .def_readwrite("newton_tol", &opt::SolverOptions::newton_tol)
        .def_readwrite("max_stages", &opt::SolverOptions::max_stages)
        .def_readwrite("max_newton", &opt::SolverOptions::max_newton)
        .def_readwrite("warm_start", &opt::SolverOptions::warm_start)
        .def_readwrite("verbose", &opt::SolverOptions::verbose);

    py::enum_<opt::SolveStatus>(m, "SolveStatus")
        .value("optimal", opt::SolveStatus::kOptimal)
        .value("infeasible", opt::SolveStatus::kInfeasible)
        .value("max_iterations", opt::SolveStatus::kMaxIterations);

    py::class_<opt::SolverDiagnostics>(m, "SolverDiagnostics")
        .def_readonly("mu_final", &opt::SolverDiagnostics::mu_final)
        .def_readonly("gap_estimate", &opt::SolverDiagnostics::gap_estimate)
        .def_readonly("stages", &opt::SolverDiagnostics::stages)
        .def_readonly("newton_iterations", &opt::SolverDiagnostics::newton_iterations)
        .def_readonly("min_eig_covariance", &opt::SolverDiagnostics::min_eig_covariance)
        .def_readonly("power_slack", &opt::SolverDiagnostics::power_slack)
        .def_readonly("rate_slack", &opt::SolverDiagnostics::rate_slack)
        .def_readonly("min_lmi_eig", &opt::SolverDiagnostics::min_lmi_eig)
        .def_readonly("boundary_relaxed", &opt::SolverDiagnostics::boundary_relaxed);

    py::class_<opt::Solution>(m, "Solution")
        .def_readonly("covariance", &opt::Solution::covariance)
        .def_readonly("crb", &opt::Solution::crb)
        .def_readonly("objective", &opt::Solution::objective)
        .def_readonly("achieved_rate", &opt::Solution::achieved_rate)
        .def_readonly("gamma_th", &opt::Solution::gamma_th)
        .def_readonly("gamma_max", &opt::Solution::gamma_max)
        .def_readonly("omega", &opt::Solution::omega)
        .def_readonly("nu", &opt::Solution::nu)
        .def_readonly("status", &opt::Solution::status)
        .def_readonly("diag", &opt::Solution::diag);

    py::class_<opt::ProbeResult>(m, "ProbeResult")
        .def_readonly("gamma_max", &opt::ProbeResult::gamma_max)
        .def_readonly("covariance", &opt::ProbeResult::covariance);

    py::class_<opt::TradeoffPoint>(m, "TradeoffPoint")
        .def_readonly("gamma_th", &opt::TradeoffPoint::gamma_th)
        .def_readonly("crb_total", &opt::TradeoffPoint::crb_total)
        .def_readonly("crb_delay", &opt::TradeoffPoint::crb_delay)
        .def_readonly("crb_doa", &opt::TradeoffPoint::crb_doa)
        .def_readonly("achieved_rate", &opt::TradeoffPoint::achieved_rate)
        .def_readonly("status", &opt::TradeoffPoint::status)
        .def_readonly("boundary_relaxed", &opt::TradeoffPoint::boundary_relaxed)
        .def_readonly("seconds", &opt::TradeoffPoint::seconds);

    py::class_<sim::SimulationRun>(m, "SimulationRun")
        .def(py::init<>())
        .def_readwrite("seed", &sim::SimulationRun::seed)
        .def_readwrite("trials", &sim::SimulationRun::trials)
        .def_readwrite("power_scale", &sim::SimulationRun::power_scale)
        .def_readwrite("delay_grid", &sim::SimulationRun::delay_grid)
        .def_readwrite("doa_grid", &sim::SimulationRun::doa_grid)
        .def_readwrite("with_noise", &sim::SimulationRun::with_noise);

    py::class_<sim::MseReport>(m, "MseReport")
        .def_readonly("trials", &sim::MseReport::trials)
        .def_readonly("mse_delay", &sim::MseReport::mse_delay)
        .def_readonly("mse_doa", &sim::MseReport::mse_doa)
        .def_readonly("bias_delay", &sim::MseReport::bias_delay)
        .def_readonly("bias_doa", &sim::MseReport::bias_doa)
        .def_readonly("crb_delay", &sim::MseReport::crb_delay)
        .def_readonly("crb_doa", &sim::MseReport::crb_doa)
        .def_readonly("crb_delay_physical", &sim::MseReport::crb_delay_physical)
        .def_readonly("crb_doa_physical", &sim::MseReport::crb_doa_physical)
        .def_readonly("ratio_doa_physical", &sim::MseReport::ratio_doa_physical)
        .def_readonly("power_scale", &sim::MseReport::power_scale)
        .def_readonly("seed", &sim::MseReport::seed);

    py::class_<sim::CorrelationReport>(m, "CorrelationReport")
        .def_readonly("p", &sim::CorrelationReport::p)
        .def_readonly("q", &sim::CorrelationReport::q)
        .def_readonly("empirical", &sim::CorrelationReport::empirical)
        .def_readonly("predicted", &sim::CorrelationReport::predicted)
        .def_readonly("standard_error", &sim::CorrelationReport::standard_error)
        .def_readonly("ratio", &sim::CorrelationReport::ratio)
        .def_readonly("trials", &sim::CorrelationReport::trials)
        .def_readonly("oversampling", &sim::CorrelationReport::oversampling);

    m.def("preset", &geometry::preset, py::arg("name"),
          "Built-in scene preset: 'scenario-1' or 'scenario-2'");
    m.def("steering_tx", &geometry::steering_tx, py::arg("theta"),
          py::arg("num_elements"), py::arg("spacing_ratio") = 0.5);
    m.def("steering_rx", &geometry::steering_rx, py::arg("phi"),
          py::arg("num_elements"), py::arg("spacing_ratio") = 0.5);
    m.def("locate_bd", &geometry::locate_bd, py::arg("tau_hat"), py::arg("phi_hat"),
          py::arg("scenario"),
          "Closed-form device position from a delay/DoA estimate");
    m.def("scene_geometry", &geometry::scene_geometry, py::arg("scenario"));

    m.def(
        "pulse_constants",
        [](const std::string& name, double dt, int quadrature_points) {
            return pulses::pulse_constants(pulses::make_pulse(name), dt,
                                           quadrature_points);
        },
        py::arg("pulse"), py::arg("dt"), py::arg("quadrature_points") = 4097);

    m.def(
        "crb_report",
        [](const geometry::Scenario& scenario, const std::string& pulse,
           const Eigen::MatrixXcd& covariance, int quadrature_points) {
            const auto geom = geometry::scene_geometry(scenario);
            const auto pc = pulses::pulse_constants(
                pulses::make_pulse(pulse), scenario.symbol_duration, quadrature_points);
            return fim::crb_report(scenario, geom, pc, covariance);
        },
        py::arg("scenario"), py::arg("pulse"), py::arg("covariance"),
        py::arg("quadrature_points") = 4097);

    m.def(
        "sum_rate",
        [](const geometry::Scenario& scenario, const Eigen::MatrixXcd& covariance) {
            const auto geom = geometry::scene_geometry(scenario);
            return rate::sum_rate(scenario, geom, covariance);
        },
        py::arg("scenario"), py::arg("covariance"));

    m.def(
        "solve",
        [](const geometry::Scenario& scenario, const std::string& pulse,
           double gamma_th, const opt::SolverOptions& options, int quadrature_points) {
            return opt::solve(make_problem(scenario, pulse, gamma_th, quadrature_points),
                              options);
        },
        py::arg("scenario"), py::arg("pulse"), py::arg("gamma_th") = 0.0,
        py::arg("options") = opt::SolverOptions{}, py::arg("quadrature_points") = 4097);

    m.def(
        "feasibility_probe",
        [](const geometry::Scenario& scenario, const std::string& pulse,
           const opt::SolverOptions& options, int quadrature_points) {
            return opt::feasibility_probe(
                make_problem(scenario, pulse, 0.0, quadrature_points), options);
        },
        py::arg("scenario"), py::arg("pulse"),
        py::arg("options") = opt::SolverOptions{}, py::arg("quadrature_points") = 4097);

    m.def(
        "sweep",
        [](const geometry::Scenario& scenario, const std::string& pulse,
           const std::vector<double>& gamma_grid, const opt::SolverOptions& options,
           int quadrature_points) {
            return opt::sweep(make_problem(scenario, pulse, 0.0, quadrature_points),
                              gamma_grid, options);
        },
        py::arg("scenario"), py::arg("pulse"), py::arg("gamma_grid"),
        py::arg("options") = opt::SolverOptions{}, py::arg("quadrature_points") = 4097);

    m.def("sample_excitation", &sim::sample_excitation, py::arg("covariance"),
          py::arg("n_symbols"), py::arg("seed"));

    m.def(
        "validate_lemma1",
        [](const geometry::Scenario& scenario, const std::string& pulse,
           const Eigen::MatrixXcd& covariance, int p, int q, int trials,
           std::uint64_t seed, int oversampling,
           const std::optional<std::vector<double>>& delay_override,
           bool analytic_derivative) {
            const auto geom = geometry::scene_geometry(scenario);
            return sim::validate_lemma1(scenario, geom, pulses::make_pulse(pulse),
                                        covariance, p, q, trials, seed, oversampling,
                                        delay_override, analytic_derivative);
        },
        py::arg("scenario"), py::arg("pulse"), py::arg("covariance"), py::arg("p"),
        py::arg("q"), py::arg("trials"), py::arg("seed"),
        py::arg("oversampling") = 8, py::arg("delay_override") = std::nullopt,
        py::arg("analytic_derivative") = false);

    m.def(
        "mse_vs_crb",
        [](const geometry::Scenario& scenario, const std::string& pulse,
           const sim::SimulationRun& run) {
            return sim::mse_vs_crb(scenario, pulses::make_pulse(pulse), run);
        },
        py::arg("scenario"), py::arg("pulse"), py::arg("run"));

    m.def(
        "run_cli",
        [](const std::vector<std::string>& args) {
            std::ostringstream out, err;
            const int code = io::run_command(args, out, err);
            return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"), "Run the command-line tool in-process; returns "
                         "(exit_code, stdout, stderr)");
}

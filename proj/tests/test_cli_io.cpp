// test_cli_io.cpp
// Configuration parsing/serialization, numeric formatting, and the
// command-line surface (exit codes, records, CSV schemas).
//
// SPDX-License-Identifier: MIT
// Copyright (c) 2026 bsisac contributors. See LICENSE for details.

#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "bsisac/cli_io.hpp"
#include "bsisac/errors.hpp"

using namespace bsisac;
using namespace bsisac::io;

namespace {

/// Extracts the value of a `key=value` line from a record blob.
std::string record_value(const std::string& blob, const std::string& key)
{
    const std::string needle = key + "=";
    std::istringstream in(blob);
    std::string line;
    while (std::getline(in, line)) {
        if (line.rfind(needle, 0) == 0) return line.substr(needle.size());
    }
    return {};
}

int run(const std::vector<std::string>& args, std::string* out_text = nullptr,
        std::string* err_text = nullptr)
{
    std::ostringstream out, err;
    const int code = run_command(args, out, err);
    if (out_text) *out_text = out.str();
    if (err_text) *err_text = err.str();
    return code;
}

struct TempFile {
    std::filesystem::path path;
    explicit TempFile(const std::string& name)
        : path(std::filesystem::temp_directory_path() / name)
    {
    }
    ~TempFile() { std::filesystem::remove(path); }
    void write(const std::string& text) const
    {
        std::ofstream f(path);
        f << text;
    }
    std::string read() const
    {
        std::ifstream f(path);
        std::ostringstream ss;
        ss << f.rdbuf();
        return ss.str();
    }
};

} // namespace

TEST_CASE("numeric formatting is shortest-roundtrip and locale-independent")
{
    CHECK(format_double(1.0) == "1");
    CHECK(format_double(0.5) == "0.5");
    CHECK(format_double(-60.0) == "-60");
    CHECK(format_double(1e-09) == "1e-09");
    const double v = 0.130832746476239;
    CHECK(std::stod(format_double(v)) == v);
}

TEST_CASE("preset configurations serialize and reparse to the same bytes")
{
    for (const char* name : {"scenario-1", "scenario-2"}) {
        auto cfg = config_from_preset(name);
        cfg.gamma_th = 0.0123;
        cfg.sweep.count = 7;
        cfg.simulation.trials = 99;
        cfg.simulation.with_noise = false;
        const std::string text = serialize_config(cfg);
        const Config reparsed = parse_config_text(text);
        CHECK(serialize_config(reparsed) == text);
        CHECK(reparsed.gamma_th == cfg.gamma_th);
        CHECK(reparsed.sweep.count == 7);
        CHECK(reparsed.simulation.trials == 99);
        CHECK(reparsed.simulation.with_noise == false);
        CHECK(reparsed.scenario.devices.size() == cfg.scenario.devices.size());
    }
}

TEST_CASE("decibel keys convert to linear units on input")
{
    const std::string text = "[scenario]\n"
                             "preset = scenario-1\n"
                             "[physics]\n"
                             "power_dbm = 30\n"
                             "clutter_dbm = -60\n"
                             "noise_dbm = -60\n"
                             "pathloss_ref_db = 30\n";
    const auto cfg = parse_config_text(text);
    CHECK(cfg.scenario.power_budget == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(cfg.scenario.clutter_power == doctest::Approx(1e-9).epsilon(1e-12));
    CHECK(cfg.scenario.noise_power == doctest::Approx(1e-9).epsilon(1e-12));
    CHECK(cfg.scenario.pathloss_ref == doctest::Approx(1e-3).epsilon(1e-12));
    // Serialization emits the linear keys, not the decibel ones.
    const std::string out = serialize_config(cfg);
    CHECK(out.find("power_budget") != std::string::npos);
    CHECK(out.find("power_dbm") == std::string::npos);
}

TEST_CASE("explicit device lists")
{
    const std::string text = "[scenario]\n"
                             "tx = 0 0\n"
                             "rx = 2 -1.5\n"
                             "mt = 4\n"
                             "mr = 4\n"
                             "bd_count = 2\n"
                             "bd1 = 1.5 -0.5 1\n"
                             "bd2 = 1 -1 0.5 0.8\n";
    const auto cfg = parse_config_text(text);
    REQUIRE(cfg.scenario.devices.size() == 2);
    CHECK(cfg.scenario.devices[0].position.x == 1.5);
    CHECK(cfg.scenario.devices[0].symbol == 1.0);
    CHECK(cfg.scenario.devices[0].reflection_fraction == 1.0);
    CHECK(cfg.scenario.devices[1].symbol == 0.5);
    CHECK(cfg.scenario.devices[1].reflection_fraction == 0.8);
    CHECK(cfg.scenario.array.num_tx == 4);

    // Device count must match the bdN lines.
    CHECK_THROWS_AS(parse_config_text("[scenario]\n"
                                      "tx = 0 0\n"
                                      "rx = 2 -1.5\n"
                                      "bd_count = 2\n"
                                      "bd1 = 1.5 -0.5 1\n"),
                    ConfigError);
}

TEST_CASE("ring placement and the reflection override")
{
    const std::string text = "[scenario]\n"
                             "tx = 0 0\n"
                             "rx = 2 -1.5\n"
                             "circle_center = 1.5 -0.5\n"
                             "circle_radius = 0.5\n"
                             "circle_count = 4\n"
                             "circle_placement = boundary\n"
                             "[physics]\n"
                             "reflection_fraction = 0.25\n";
    const auto cfg = parse_config_text(text);
    REQUIRE(cfg.scenario.devices.size() == 4);
    for (const auto& d : cfg.scenario.devices) {
        CHECK(d.reflection_fraction == 0.25);
    }
    CHECK(cfg.scenario.devices[0].position.x == doctest::Approx(2.0));
}

TEST_CASE("parse errors carry location context")
{
    try {
        parse_config_text("[scenario]\nbogus_key = 1\n", "test.ini");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        const std::string what = e.what();
        CHECK(what.find("bogus_key") != std::string::npos);
        CHECK(what.find("test.ini") != std::string::npos);
        CHECK(what.find("2") != std::string::npos); // line number
    }

    CHECK_THROWS_AS(parse_config_text("[nosuchsection]\nx = 1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("[scenario]\nmt = banana\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("[scenario]\npreset = scenario-9\n"),
                    ConfigError);
    CHECK_THROWS_AS(parse_config_text("[solver]\ngamma_th = -1\n"), ConfigError);
}

TEST_CASE("crb subcommand emits the bound record")
{
    std::string out;
    CHECK(run({"crb", "--preset", "scenario-1"}, &out) == 0);
    CHECK(record_value(out, "record") == "crb");
    CHECK(record_value(out, "pulse") == "g1");
    CHECK(record_value(out, "devices") == "1");
    CHECK(std::stod(record_value(out, "crb_total")) ==
          doctest::Approx(8.0 * 2.29718e-08).epsilon(1e-4));
    CHECK(std::stod(record_value(out, "crb_doa_total_physical")) ==
          doctest::Approx(1.31638e-07).epsilon(1e-4));
    CHECK(record_value(out, "ill_conditioned") == "0");
    CHECK(!record_value(out, "crb_delay_bd1").empty());
}

TEST_CASE("rate subcommand emits the certificate record")
{
    std::string out;
    CHECK(run({"rate", "--preset", "scenario-1"}, &out) == 0);
    CHECK(record_value(out, "record") == "rate");
    CHECK(std::stod(record_value(out, "sum_rate_isotropic")) ==
          doctest::Approx(0.130832746476239).epsilon(1e-10));
    CHECK(std::stod(record_value(out, "gamma_max")) ==
          doctest::Approx(0.154270156785424).epsilon(1e-6));
}

TEST_CASE("optimize subcommand solves and reports")
{
    std::string out;
    CHECK(run({"optimize", "--preset", "scenario-1"}, &out) == 0);
    CHECK(record_value(out, "record") == "optimize");
    CHECK(record_value(out, "status") == "optimal");
    CHECK(std::stod(record_value(out, "objective")) ==
          doctest::Approx(2.29718e-08).epsilon(1e-4));
    CHECK(std::stod(record_value(out, "covariance_trace")) ==
          doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("infeasible floors exit with code 3")
{
    std::string out;
    CHECK(run({"optimize", "--preset", "scenario-1", "--gamma-th", "0.5"}, &out) == 3);
    CHECK(record_value(out, "status") == "infeasible");
    CHECK(std::stod(record_value(out, "gamma_max")) ==
          doctest::Approx(0.154270156785424).epsilon(1e-6));
}

TEST_CASE("sweep subcommand emits the documented CSV")
{
    TempFile cfg_file("bsisac_test_sweep.ini");
    cfg_file.write("[scenario]\n"
                   "preset = scenario-1\n"
                   "[sweep]\n"
                   "count = 3\n"
                   "gamma_min = 0\n"
                   "gamma_max = 0.1\n");
    std::string out;
    CHECK(run({"sweep", "--config", cfg_file.path.string()}, &out) == 0);
    std::istringstream lines(out);
    std::string header;
    std::getline(lines, header);
    CHECK(header ==
          "gamma_th,crb_total,crb_delay,crb_doa,achieved_rate,status,seconds");
    int rows = 0;
    std::string row;
    while (std::getline(lines, row)) {
        if (!row.empty()) ++rows;
        CHECK(row.find("optimal") != std::string::npos);
    }
    CHECK(rows == 3);
}

TEST_CASE("simulate subcommand emits one CSV row")
{
    std::string out;
    CHECK(run({"simulate", "--preset", "scenario-1", "--trials", "5", "--seed",
               "7", "--power-scale", "1000"},
              &out) == 0);
    std::istringstream lines(out);
    std::string header, row, extra;
    std::getline(lines, header);
    CHECK(header == "trials,mse_delay,mse_doa,bias_delay,bias_doa,crb_delay,"
                    "crb_doa,crb_delay_physical,crb_doa_physical,"
                    "ratio_doa_physical,power_scale,seed");
    std::getline(lines, row);
    CHECK(row.rfind("5,", 0) == 0);
    CHECK(row.find(",7") != std::string::npos); // seed echoed in the row
    CHECK(!std::getline(lines, extra));         // single data row
}

TEST_CASE("validate subcommand passes its self-checks")
{
    std::string out;
    CHECK(run({"validate", "--preset", "scenario-1"}, &out) == 0);
    std::istringstream lines(out);
    std::string line;
    int checks = 0;
    while (std::getline(lines, line)) {
        if (line.empty()) continue;
        CHECK(line.rfind("PASS ", 0) == 0);
        ++checks;
    }
    CHECK(checks >= 6);
}

TEST_CASE("argument and dispatch errors use exit code 2")
{
    std::string out, err;
    CHECK(run({}, &out, &err) == 2);
    CHECK(err.find("Usage") != std::string::npos);

    CHECK(run({"crb", "--no-such-flag"}, &out, &err) == 2);
    CHECK(run({"crb", "--config", "a.ini", "--preset", "scenario-1"}, &out,
              &err) == 2);
    CHECK(run({"crb", "--config", "/nonexistent/path.ini"}, &out, &err) == 2);
    CHECK(run({"crb", "--preset", "scenario-9"}, &out, &err) == 2);
    CHECK(run({"optimize", "--preset", "scenario-1", "--gamma-th", "-1"}, &out,
              &err) == 2);
    CHECK(run({"crb", "--preset", "scenario-1", "--mt", "0"}, &out, &err) == 2);
}

TEST_CASE("help exits cleanly")
{
    std::string out;
    CHECK(run({"--help"}, &out) == 0);
    CHECK(out.find("bsisac") != std::string::npos);
    CHECK(out.find("optimize") != std::string::npos);
}

TEST_CASE("output schemas are documented per subcommand")
{
    for (const char* sub :
         {"crb", "rate", "optimize", "sweep", "simulate", "validate"}) {
        std::string out;
        CHECK(run({sub, "--describe-output"}, &out) == 0);
        CHECK(!out.empty());
    }
    std::string out;
    CHECK(run({"sweep", "--describe-output"}, &out) == 0);
    CHECK(out.find("gamma_th") != std::string::npos);
    CHECK(out.find("seconds") != std::string::npos);
    CHECK_THROWS_AS(describe_output("bogus"), ConfigError);
}

TEST_CASE("--out redirects records to a file")
{
    TempFile sink("bsisac_test_out.txt");
    std::string out;
    CHECK(run({"crb", "--preset", "scenario-1", "--out", sink.path.string()},
              &out) == 0);
    CHECK(out.empty());
    const std::string contents = sink.read();
    CHECK(contents.find("record=crb") != std::string::npos);
}

TEST_CASE("command-line overrides reach the scenario")
{
    std::string out4, out8;
    CHECK(run({"crb", "--preset", "scenario-1", "--mt", "4", "--mr", "4"},
              &out4) == 0);
    CHECK(run({"crb", "--preset", "scenario-1"}, &out8) == 0);
    const double t4 = std::stod(record_value(out4, "crb_total"));
    const double t8 = std::stod(record_value(out8, "crb_total"));
    CHECK(t4 > t8); // smaller arrays carry less information

    // Power override: +10 dB scales every bound down by 10x.
    std::string out40;
    CHECK(run({"crb", "--preset", "scenario-1", "--power-dbm", "40"}, &out40) == 0);
    CHECK(std::stod(record_value(out40, "crb_total")) * 10.0 ==
          doctest::Approx(t8).epsilon(1e-9));

    // Pulse override is echoed and changes the bound.
    std::string outg3;
    CHECK(run({"crb", "--preset", "scenario-1", "--pulse", "g3"}, &outg3) == 0);
    CHECK(record_value(outg3, "pulse") == "g3");
    CHECK(std::stod(record_value(outg3, "crb_total")) > t8);
}

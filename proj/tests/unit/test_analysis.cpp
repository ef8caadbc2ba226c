#include "oracles.hpp"

#include "xbarsim/analysis.hpp"
#include "xbarsim/error.hpp"
#include "xbarsim/ideal.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

using namespace xbarsim;
using Catch::Matchers::WithinRel;

namespace {

CrossbarConfig one_by_one(double g, DriveMode mode, Parasitics p) {
    CrossbarConfig cfg;
    cfg.g = Eigen::MatrixXd::Constant(1, 1, g);
    cfg.mode = mode;
    cfg.parasitics = p;
    return cfg;
}

const MemristorDevice kDevice(1e-6, 1e-3, 1.0, 1e4);

}  // namespace

TEST_CASE("single-pole bandwidth", "[analysis]") {
    const std::vector<double> drive{1e-6};
    const auto cfg = one_by_one(1e-4, DriveMode::Current, {0.0, 1e-12, 0.0});
    const auto bw = compute_bandwidth(cfg, drive, 0);
    const double pole = 1.0 / (2.0 * std::numbers::pi * 1e4 * 1e-12);
    CHECK_FALSE(bw.infinite);
    CHECK_FALSE(bw.multi_pole);
    CHECK_THAT(bw.hz, WithinRel(pole, 1e-2));

    auto doubled = cfg;
    doubled.parasitics.c_p = 2e-12;
    CHECK_THAT(compute_bandwidth(doubled, drive, 0).hz, WithinRel(bw.hz / 2.0, 1e-2));
}

TEST_CASE("bandwidth without capacitance is unbounded", "[analysis]") {
    const std::vector<double> drive{1.0};
    const auto bw = compute_bandwidth(one_by_one(1e-4, DriveMode::Voltage, {1.0, 0.0, 10.0}),
                                      drive, 0);
    CHECK(bw.infinite);
    CHECK(std::isinf(bw.hz));
    CHECK_THROWS_AS(compute_bandwidth(one_by_one(1e-4, DriveMode::Voltage, {}), drive, 1),
                    InvalidInput);
}

TEST_CASE("resistive energy over a fixed window", "[analysis]") {
    const std::vector<double> drive{1.0};
    const auto cfg = one_by_one(1e-4, DriveMode::Voltage, {});
    EnergyOptions opts;
    opts.fixed_window = 1e-6;
    CHECK_THAT(compute_energy(cfg, drive, opts).joules, WithinRel(1e-10, 1e-12));
    opts.fixed_window = 2e-6;
    CHECK_THAT(compute_energy(cfg, drive, opts).joules, WithinRel(2e-10, 1e-12));
}

TEST_CASE("energy is invariant under moving the drive to another row", "[analysis]") {
    CrossbarConfig cfg;
    cfg.g = Eigen::MatrixXd::Constant(4, 4, 2e-4);
    cfg.parasitics = {0.0, 1e-15, 100.0};
    std::vector<double> first{1.0, 0.0, 0.0, 0.0};
    std::vector<double> third{0.0, 0.0, 1.0, 0.0};
    const double e1 = compute_energy(cfg, first).joules;
    const double e3 = compute_energy(cfg, third).joules;
    CHECK(e1 > 0.0);
    CHECK_THAT(e3, WithinRel(e1, 1e-12));
}

TEST_CASE("energy gives up when the response cannot settle in time", "[analysis]") {
    const std::vector<double> drive{1.0, 0.5};
    CrossbarConfig cfg;
    cfg.g = Eigen::MatrixXd::Constant(2, 2, 1e-4);
    cfg.parasitics = {1.0, 1e-12, 1e4};
    EnergyOptions opts;
    opts.max_time = 1e-12;
    CHECK_THROWS_AS(compute_energy(cfg, drive, opts), Timeout);
    opts.settle_rel = 1.5;
    CHECK_THROWS_AS(compute_energy(cfg, drive, opts), InvalidInput);
}

TEST_CASE("names round-trip", "[analysis]") {
    for (auto p : {SweepParameter::TerminalResistance, SweepParameter::WireResistance,
                   SweepParameter::NodeCapacitance, SweepParameter::GScale,
                   SweepParameter::TerminalConductance}) {
        CHECK(parse_sweep_parameter(to_string(p)) == p);
    }
    for (auto m : {Metric::Bandwidth, Metric::ErrorVoltageMode, Metric::ErrorCurrentMode,
                   Metric::Energy}) {
        CHECK(parse_metric(to_string(m)) == m);
    }
    CHECK(column_name(SweepParameter::TerminalResistance) == "r_t_ohm");
    CHECK(column_name(Metric::Bandwidth) == "bandwidth_hz");
    CHECK_THROWS_AS(parse_sweep_parameter("r_x"), InvalidInput);
    CHECK_THROWS_AS(parse_metric("latency"), InvalidInput);
    CHECK_THROWS_AS(parse_observable("gain"), InvalidInput);
}

TEST_CASE("single-value sweep equals the direct calls", "[analysis]") {
    std::mt19937_64 rng(31);
    auto in = oracle::random_instance(rng, 3, 3, 1e-5, 2e-5, 0.2, 1.0);
    in.cfg.parasitics = {1.0, 1e-15, 10.0};
    SweepSpec spec;
    spec.parameter = SweepParameter::TerminalResistance;
    spec.values = {250.0};
    spec.metrics = {Metric::Bandwidth, Metric::ErrorVoltageMode, Metric::Energy};
    const auto res = run_sweep(kDevice, in.cfg, in.drive, spec);

    auto direct = in.cfg;
    direct.parasitics.r_t = 250.0;
    CHECK(res.metric(Metric::Bandwidth)[0] == compute_bandwidth(direct, in.drive, 0).hz);
    CHECK(res.metric(Metric::ErrorVoltageMode)[0] ==
          compute_error(direct, in.drive, DriveMode::Voltage));
    CHECK(res.metric(Metric::Energy)[0] == compute_energy(direct, in.drive).joules);
    CHECK(res.axis_values() == spec.values);
    CHECK_THROWS_AS(res.metric(Metric::ErrorCurrentMode), InvalidInput);
}

TEST_CASE("sweep preconditions", "[analysis]") {
    std::mt19937_64 rng(32);
    const auto in = oracle::random_instance(rng, 2, 2, 1e-5, 2e-5, 0.2, 1.0);
    SweepSpec spec;
    spec.metrics = {Metric::ErrorVoltageMode};
    CHECK_THROWS_AS(run_sweep(kDevice, in.cfg, in.drive, spec), InvalidInput);
    spec.values = {-1.0};
    CHECK_THROWS_AS(run_sweep(kDevice, in.cfg, in.drive, spec), InvalidInput);
    spec.values = {1.0};
    spec.metrics = {Metric::ErrorCurrentMode};
    CHECK_THROWS_AS(run_sweep(kDevice, in.cfg, in.drive, spec), InvalidInput);
    // Scaling past g_on leaves the device range.
    CHECK_THROWS(apply_sweep_value(kDevice, in.cfg, SweepParameter::GScale, 1e3));
}

TEST_CASE("errors vanish at the zero-parasitic corner", "[analysis]") {
    std::mt19937_64 rng(33);
    for (auto mode : {DriveMode::Voltage, DriveMode::Current}) {
        auto in = oracle::random_instance(rng, 8, 8, 1e-5, 2e-5, 0.2, 1.0);
        in.cfg.mode = mode;
        SweepSpec spec;
        spec.parameter = SweepParameter::GScale;
        spec.values = {0.1, 1.0, 10.0};
        const Metric m = mode == DriveMode::Voltage ? Metric::ErrorVoltageMode
                                                    : Metric::ErrorCurrentMode;
        spec.metrics = {m};
        const auto res = run_sweep(kDevice, in.cfg, in.drive, spec);
        for (double e : res.metric(m)) {
            CHECK(e < 1e-9);
        }
    }
}

TEST_CASE("Monte Carlo is deterministic per seed", "[analysis]") {
    std::mt19937_64 rng(34);
    auto in = oracle::random_instance(rng, 4, 4, 1e-5, 2e-5, 1e-7, 1e-6);
    in.cfg.mode = DriveMode::Current;
    McSpec spec;
    spec.g_rel_std = 0.01;
    spec.neuron_rel_std = 0.01;
    spec.samples = 50;
    spec.seed = 42;
    spec.neuron = find_preset("cm-1.8").params;
    const auto a = monte_carlo(kDevice, in.cfg, in.drive, spec);
    const auto b = monte_carlo(kDevice, in.cfg, in.drive, spec);
    REQUIRE(a.parameters.size() == 3);
    for (std::size_t k = 0; k < 3; ++k) {
        CHECK(a.parameters[k].mean == b.parameters[k].mean);
        CHECK(a.parameters[k].std == b.parameters[k].std);
        CHECK(a.parameters[k].std > 0.0);
    }
    spec.seed = 43;
    const auto c = monte_carlo(kDevice, in.cfg, in.drive, spec);
    CHECK(c.parameter("a").mean != a.parameter("a").mean);
}

TEST_CASE("Monte Carlo with zero spread", "[analysis]") {
    std::mt19937_64 rng(35);
    auto in = oracle::random_instance(rng, 3, 3, 1e-5, 2e-5, 1e-7, 1e-6);
    in.cfg.mode = DriveMode::Current;
    McSpec spec;
    spec.samples = 20;
    spec.neuron = find_preset("cm-1.8").params;
    const auto st = monte_carlo(kDevice, in.cfg, in.drive, spec);
    for (const auto& p : st.parameters) {
        CHECK(p.std == 0.0);
        CHECK(oracle::rel_diff(p.mean, p.nominal) < 1e-6);
    }
    spec.observable = McObservable::DotProductError;
    in.cfg.parasitics = {1.0, 0.0, 10.0};
    const auto err = monte_carlo(kDevice, in.cfg, in.drive, spec);
    CHECK(err.parameter("error").std == 0.0);
    CHECK(err.parameter("error").mean == err.parameter("error").nominal);
}

TEST_CASE("Monte Carlo mean of a stays within three standard errors", "[analysis]") {
    std::mt19937_64 rng(36);
    auto in = oracle::random_instance(rng, 4, 4, 1e-5, 2e-5, 1e-7, 1e-6);
    in.cfg.mode = DriveMode::Current;
    McSpec spec;
    spec.g_rel_std = 0.01;
    spec.neuron_rel_std = 0.01;
    spec.samples = 200;
    spec.seed = 7;
    spec.neuron = find_preset("cm-1.8").params;
    const auto st = monte_carlo(kDevice, in.cfg, in.drive, spec);
    const auto& a = st.parameter("a");
    CHECK(std::abs(a.mean - a.nominal) <= 3.0 * a.std / std::sqrt(200.0));
}

TEST_CASE("heavy clamping raises the truncation flag", "[analysis]") {
    CrossbarConfig cfg;
    cfg.g = Eigen::MatrixXd::Constant(2, 2, kDevice.g_on());
    const std::vector<double> drive{1.0, 1.0};
    McSpec spec;
    spec.observable = McObservable::DotProductError;
    spec.g_rel_std = 0.1;
    spec.samples = 40;
    cfg.parasitics = {1.0, 0.0, 10.0};
    const auto st = monte_carlo(kDevice, cfg, drive, spec);
    CHECK(st.clamped_fraction > 0.4);
    CHECK(st.truncation_warning == (st.clamped_fraction > 0.5));
}

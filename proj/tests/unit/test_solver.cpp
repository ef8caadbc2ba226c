#include "oracles.hpp"

#include "xbarsim/error.hpp"
#include "xbarsim/solver.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

using namespace xbarsim;
using Catch::Matchers::WithinRel;

namespace {

oracle::Instance parasitic_instance(std::mt19937_64& rng, std::size_t rows, std::size_t cols,
                                    DriveMode mode) {
    auto in = oracle::random_instance(rng, rows, cols, 1e-5, 1e-3,
                                      mode == DriveMode::Voltage ? 0.1 : 1e-7,
                                      mode == DriveMode::Voltage ? 1.0 : 1e-6);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    in.cfg.mode = mode;
    in.cfg.parasitics = {0.1 + 10.0 * u(rng), 1e-15 * (1.0 + u(rng)), 1.0 + 100.0 * u(rng)};
    return in;
}

NodalSystem single_rc(double r, double c, double v) {
    CircuitBuilder b(2);
    b.add_voltage_source(0, v, 0.0);
    b.add_conductance(0, 1, 1.0 / r);
    b.add_capacitor(1, c);
    return b.build();
}

}  // namespace

TEST_CASE("sparse solve agrees with both dense references", "[solver]") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 1u << (trial % 4);
        const auto mode = trial % 2 ? DriveMode::Current : DriveMode::Voltage;
        const auto in = parasitic_instance(rng, n, n + trial % 3, mode);
        const auto sys = assemble(in.cfg, in.drive);
        const auto dc = solve_dc(sys);
        const auto dense = dense_oracle_solve(sys);
        CHECK(oracle::max_rel(dc.column_currents, dense.column_currents) < 1e-11);
        CHECK(oracle::max_rel(dc.column_currents, oracle::dc_columns(in.cfg, in.drive)) < 1e-11);
        CHECK(dc.residual <= 1e-10 * sys.src.norm());
    }
}

TEST_CASE("Norton sources match the MNA reference", "[solver]") {
    std::mt19937_64 rng(12);
    auto in = parasitic_instance(rng, 4, 3, DriveMode::Voltage);
    in.cfg.r_s = 25.0;
    const auto dc = solve_dc(assemble(in.cfg, in.drive));
    CHECK(oracle::max_rel(dc.column_currents, oracle::dc_columns(in.cfg, in.drive)) < 1e-11);
}

TEST_CASE("column currents are linear in the drive", "[solver]") {
    std::mt19937_64 rng(13);
    for (auto mode : {DriveMode::Voltage, DriveMode::Current}) {
        auto a = parasitic_instance(rng, 4, 4, mode);
        auto b = oracle::random_instance(rng, 4, 4, 1e-5, 1e-3, 0.1, 1.0);
        std::vector<double> sum(4);
        std::vector<double> scaled(4);
        for (std::size_t i = 0; i < 4; ++i) {
            sum[i] = a.drive[i] + b.drive[i];
            scaled[i] = 3.5 * a.drive[i];
        }
        const auto ia = solve_dc(assemble(a.cfg, a.drive)).column_currents;
        const auto ib = solve_dc(assemble(a.cfg, b.drive)).column_currents;
        const auto isum = solve_dc(assemble(a.cfg, sum)).column_currents;
        const auto iscaled = solve_dc(assemble(a.cfg, scaled)).column_currents;
        CHECK(oracle::max_rel(Eigen::VectorXd(ia + ib), isum) < 1e-12);
        CHECK(oracle::max_rel(Eigen::VectorXd(3.5 * ia), iscaled) < 1e-12);
    }
}

TEST_CASE("KCL holds at every free node", "[solver]") {
    std::mt19937_64 rng(14);
    const auto in = parasitic_instance(rng, 5, 3, DriveMode::Current);
    const auto sys = assemble(in.cfg, in.drive);
    const auto dc = solve_dc(sys);
    Eigen::VectorXd net = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(sys.node_count));
    for (const auto& br : sys.branches) {
        const double va = dc.node_voltages(br.a);
        const double vb = br.b == kGround ? 0.0 : dc.node_voltages(br.b);
        const double i = br.conductance * (va - vb);
        net(br.a) -= i;
        if (br.b != kGround) {
            net(br.b) += i;
        }
    }
    for (const auto& s : sys.sources) {
        net(s.node) += s.value;
    }
    CHECK(net.cwiseAbs().maxCoeff() < 1e-12 * 1e-6);
}

TEST_CASE("current mode conserves total current", "[solver]") {
    std::mt19937_64 rng(15);
    for (double r_t : {0.0, 10.0}) {
        auto in = parasitic_instance(rng, 6, 4, DriveMode::Current);
        in.cfg.parasitics.r_t = r_t;
        const auto dc = solve_dc(assemble(in.cfg, in.drive));
        double total_in = 0.0;
        for (double d : in.drive) {
            total_in += d;
        }
        CHECK_THAT(dc.column_currents.sum(), WithinRel(total_in, 1e-12));
    }
}

TEST_CASE("singular systems raise NumericalFailure", "[solver]") {
    CircuitBuilder b(3);
    b.add_conductance(0, 1, 1e-3);
    b.add_terminal(0, 100.0);
    b.add_current_source(2, 1e-6);  // node 2 floats
    const auto sys = b.build();
    CHECK_THROWS_AS(solve_dc(sys), NumericalFailure);
}

TEST_CASE("AC phasors match a complex MNA reference", "[solver]") {
    std::mt19937_64 rng(16);
    for (auto mode : {DriveMode::Voltage, DriveMode::Current}) {
        const auto in = parasitic_instance(rng, 3, 4, mode);
        const auto sys = assemble(in.cfg, in.drive);
        for (double f : {0.0, 1e6, 1e10, 1e12}) {
            const auto ac = solve_ac(sys, f);
            const auto ref = oracle::ac_columns(in.cfg, in.drive, f);
            CHECK(oracle::max_rel(ac.column_phasors, ref) < 1e-10);
        }
    }
}

TEST_CASE("RC step follows the exponential", "[solver]") {
    const double r = 1e4;
    const double c = 1e-12;
    const double tau = r * c;
    const auto sys = single_rc(r, c, 1.0);
    TransientOptions opts;
    opts.t_end = 5.0 * tau;
    opts.dt = tau / 1000.0;
    const auto tr = solve_transient(sys, opts);
    double worst = 0.0;
    for (std::size_t k = 0; k < tr.time.size(); ++k) {
        const double exact = 1.0 - std::exp(-tr.time[k] / tau);
        worst = std::max(worst, std::abs(tr.node_voltages[k](1) - exact));
    }
    CHECK(worst < 1e-6);

    // A source charging C through R delivers C V^2 in total.
    opts.t_end = 40.0 * tau;
    const auto full = solve_transient(sys, opts);
    CHECK_THAT(full.energy(), WithinRel(c, 1e-5));
}

TEST_CASE("transient settles to the DC solution", "[solver]") {
    std::mt19937_64 rng(17);
    const auto in = parasitic_instance(rng, 3, 3, DriveMode::Voltage);
    const auto sys = assemble(in.cfg, in.drive);
    const double tau = dominant_time_constant(sys);
    REQUIRE(tau > 0.0);
    CHECK(smallest_time_constant(sys) <= tau);
    TransientOptions opts;
    opts.t_end = 60.0 * tau;
    opts.dt = tau / 50.0;
    opts.damping_steps = 2;
    const auto tr = solve_transient(sys, opts);
    const auto dc = solve_dc(sys);
    CHECK(oracle::max_rel(tr.column_currents.back(), dc.column_currents) < 1e-9);
}

TEST_CASE("transient options are validated", "[solver]") {
    const auto sys = single_rc(1e3, 1e-12, 1.0);
    TransientOptions opts;
    CHECK_THROWS_AS(solve_transient(sys, opts), InvalidInput);
    opts.t_end = 1e-9;
    opts.dt = 1e-6;
    CHECK_THROWS_AS(solve_transient(sys, opts), InvalidInput);
}

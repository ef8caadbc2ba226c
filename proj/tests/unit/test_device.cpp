#include "oracles.hpp"

#include "xbarsim/device.hpp"
#include "xbarsim/error.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <vector>

using namespace xbarsim;
using Catch::Matchers::WithinRel;

TEST_CASE("device rejects malformed parameters", "[device]") {
    CHECK_THROWS_AS(MemristorDevice(1e-3, 1e-5, 1.0, 1e4), InvalidInput);
    CHECK_THROWS_AS(MemristorDevice(0.0, 1e-3, 1.0, 1e4), InvalidInput);
    CHECK_THROWS_AS(MemristorDevice(1e-5, 1e-3, -1.0, 1e4), InvalidInput);
    CHECK_THROWS_AS(MemristorDevice(1e-5, 1e-3, 1.0, 0.0), InvalidInput);
    CHECK_THROWS_AS(MemristorDevice(1e-5, std::nan(""), 1.0, 1e4), InvalidInput);
    CHECK_NOTHROW(MemristorDevice(1e-5, 1e-3, 0.0, 1e4));
}

TEST_CASE("state saturates and conductance interpolates", "[device]") {
    const MemristorDevice dev(1e-5, 1e-3, 1.0, 1e4);
    CHECK(DeviceState(-0.5).x() == 0.0);
    CHECK(DeviceState(2.0).x() == 1.0);
    CHECK_THROWS_AS(DeviceState(std::nan("")), InvalidInput);
    CHECK(conductance(dev, DeviceState(0.0)) == 1e-5);
    CHECK(conductance(dev, DeviceState(1.0)) == 1e-3);
    CHECK_THAT(conductance(dev, DeviceState(0.5)), WithinRel(0.5 * (1e-5 + 1e-3), 1e-15));
    CHECK_THAT(device_current(dev, DeviceState(0.25), 0.3),
               WithinRel(0.3 * (1e-5 + 0.25 * (1e-3 - 1e-5)), 1e-15));
}

TEST_CASE("programming inverts conductance", "[device]") {
    const MemristorDevice dev(1e-5, 1e-3, 1.0, 1e4);
    for (double g : {1e-5, 3.3e-5, 2e-4, 7.7e-4, 1e-3}) {
        CHECK_THAT(conductance(dev, program_to_conductance(dev, g)), WithinRel(g, 1e-14));
    }
    try {
        program_to_conductance(dev, 2e-3);
        FAIL("expected OutOfRange");
    } catch (const OutOfRange& e) {
        CHECK(e.kind() == ErrorKind::OutOfRange);
        CHECK(std::string(e.what()).find("0.001") != std::string::npos);
    }
    CHECK_THROWS_AS(program_to_conductance(dev, 1e-6), OutOfRange);
}

TEST_CASE("sub-threshold drive leaves the state alone", "[device]") {
    const MemristorDevice dev(1e-5, 1e-3, 1.0, 1e4);
    const std::vector<double> v(1000, 0.99);
    CHECK(evolve_state(dev, DeviceState(0.3), v, 1e-6).x() == 0.3);
    const std::vector<double> neg(1000, -1.0);
    CHECK(evolve_state(dev, DeviceState(0.3), neg, 1e-6).x() == 0.3);
}

TEST_CASE("evolution converges to the separable closed form", "[device]") {
    const double g_off = 1e-5;
    const double g_on = 1e-3;
    const double k = 1e4;
    const MemristorDevice dev(g_off, g_on, 0.5, k);
    const double v = 1.2;
    const double t = 2e-2;
    const double x0 = 0.1;
    const double exact = oracle::drift_state(g_off, g_on, k, x0, v, t);
    REQUIRE(exact < 1.0);

    double prev_err = 0.0;
    for (std::size_t steps : {1000u, 2000u, 4000u, 8000u}) {
        const std::vector<double> wave(steps, v);
        const double x = evolve_state(dev, DeviceState(x0), wave, t / static_cast<double>(steps)).x();
        const double err = std::abs(x - exact);
        if (prev_err > 0.0) {
            // Forward Euler is first order: halving dt halves the error.
            CHECK_THAT(prev_err / err, WithinRel(2.0, 0.02));
        }
        prev_err = err;
    }
    CHECK(prev_err / exact < 1e-3);
}

TEST_CASE("state stays inside the unit interval under strong drive", "[device]") {
    const MemristorDevice dev(1e-5, 1e-3, 0.0, 1e6);
    const std::vector<double> up(100, 5.0);
    const std::vector<double> down(100, -5.0);
    CHECK(evolve_state(dev, DeviceState(0.5), up, 1e-3).x() == 1.0);
    CHECK(evolve_state(dev, DeviceState(0.5), down, 1e-3).x() == 0.0);
}

TEST_CASE("non-finite waveform samples are reported by index", "[device]") {
    const MemristorDevice dev(1e-5, 1e-3, 1.0, 1e4);
    std::vector<double> v(10, 2.0);
    v[7] = std::numeric_limits<double>::infinity();
    try {
        evolve_state(dev, DeviceState(0.0), v, 1e-6);
        FAIL("expected InvalidInput");
    } catch (const InvalidInput& e) {
        CHECK(std::string(e.what()).find("index 7") != std::string::npos);
    }
    CHECK_THROWS_AS(evolve_state(dev, DeviceState(0.0), v, 0.0), InvalidInput);
}

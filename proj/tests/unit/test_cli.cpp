#include "oracles.hpp"

#include "commands.hpp"
#include "config.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace xbarsim;
using namespace xbarsim::cli;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    int code;
    std::string out;
    std::string err;
};

Outcome invoke(const std::vector<std::string>& args) {
    std::ostringstream out;
    std::ostringstream err;
    const int code = run(args, out, err);
    return {code, out.str(), err.str()};
}

fs::path scratch_dir() {
    const fs::path dir = fs::temp_directory_path() / "xbarsim_cli_tests";
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// Data rows of a CSV result, comments and header dropped.
std::vector<std::vector<std::string>> rows_of(const std::string& csv) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(csv);
    bool header = true;
    for (std::string line; std::getline(in, line);) {
        if (line.empty() || line[0] == '#') {
            continue;
        }
        if (header) {
            header = false;
            continue;
        }
        std::vector<std::string> fields;
        std::stringstream ss(line);
        for (std::string f; std::getline(ss, f, ',');) {
            fields.push_back(f);
        }
        if (!line.empty() && line.back() == ',') {
            fields.emplace_back();
        }
        rows.push_back(fields);
    }
    return rows;
}

}  // namespace

TEST_CASE("minimal config loads with defaults", "[cli]") {
    const auto cfg = parse_config(
        "crossbar:\n  n_rows: 2\n  n_cols: 2\n  conductance:\n    kind: uniform\n    value: 1.0e-4\n");
    CHECK(cfg.device.g_off == 1e-5);
    CHECK(cfg.device.g_on == 1e-3);
    CHECK(cfg.mode == DriveMode::Voltage);
    CHECK(cfg.parasitics.r_p == 0.0);
    CHECK(cfg.analysis.seed == 42);
    CHECK(cfg.neuron.preset == "cm-1.8");
    CHECK(cfg.make_crossbar().g == Eigen::MatrixXd::Constant(2, 2, 1e-4));
    CHECK(cfg.make_drive() == std::vector<double>{1.0, 1.0});
}

TEST_CASE("unknown keys are rejected with their path", "[cli]") {
    try {
        parse_config("crossbar:\n  n_row: 3\n");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.key_path() == "crossbar.n_row");
        CHECK(std::string(e.what()).find("n_row") != std::string::npos);
        CHECK(e.line() == 2);
    }
}

TEST_CASE("syntax errors carry line and column", "[cli]") {
    try {
        parse_config("device:\n  g_off: [1, 2\n", "bad.yaml");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.line() >= 2);
        CHECK(e.column() >= 1);
        CHECK(std::string(e.what()).rfind("bad.yaml:", 0) == 0);
    }
}

TEST_CASE("invariant violations cite the rule", "[cli]") {
    try {
        parse_config("device:\n  g_off: 1.0e-3\n  g_on: 1.0e-5\n");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("g_off < g_on") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_config("device:\n  g_off: abc\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("crossbar:\n  conductance:\n    value: 5.0e-3\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("drive:\n  kind: values\n  values: [1.0]\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("analysis:\n  sweep:\n    parameter: r_x\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("neuron:\n  preset: cm-9\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("mode: diagonal\n"), ConfigError);
}

TEST_CASE("overrides create and replace keys", "[cli]") {
    const auto cfg = default_config({parse_override("parasitics.r_t=100"),
                                     parse_override("analysis.sweep.values=[1, 2, 3]"),
                                     parse_override("mode=current")});
    CHECK(cfg.parasitics.r_t == 100.0);
    CHECK(cfg.analysis.sweep.values == std::vector<double>{1, 2, 3});
    CHECK(cfg.mode == DriveMode::Current);
    CHECK(cfg.drive.value == 1e-6);
    CHECK_THROWS_AS(parse_override("novalue"), ConfigError);
}

TEST_CASE("resolved config round-trips through JSON", "[cli]") {
    const auto cfg = load_config(XBARSIM_SOURCE_DIR "/configs/example.yaml");
    const auto j = to_json(cfg);
    const auto again = parse_config(j.dump());
    CHECK(to_json(again) == j);
    CHECK(again.make_crossbar().g == cfg.make_crossbar().g);
    CHECK(again.make_drive() == cfg.make_drive());
    CHECK(again.analysis.sweep.values.size() == 10);
}

TEST_CASE("presets subcommand prints the published values", "[cli]") {
    const auto r = invoke({"presets"});
    REQUIRE(r.code == 0);
    const auto rows = rows_of(r.out);
    REQUIRE(rows.size() == 4);
    CHECK(rows[0][0] == "vm-1.8");
    CHECK(std::stod(rows[0][1]) == 1.754);
    CHECK(std::stod(rows[1][6]) == 200.0);
    CHECK(rows[2][4].empty());
}

TEST_CASE("dotprod on the zero-parasitic example", "[cli]") {
    const auto r = invoke({"dotprod", "--set", "crossbar.conductance.kind=matrix", "--set",
                           "crossbar.conductance.matrix=[[1.0e-4, 2.0e-4], [3.0e-4, 4.0e-4]]",
                           "--set", "drive.kind=values", "--set", "drive.values=[1.0, 0.5]"});
    REQUIRE(r.code == 0);
    const auto rows = rows_of(r.out);
    REQUIRE(rows.size() == 2);
    CHECK(oracle::rel_diff(std::stod(rows[0][2]), 2.5e-4) < 1e-9);
    CHECK(oracle::rel_diff(std::stod(rows[1][2]), 4e-4) < 1e-9);
    CHECK(oracle::rel_diff(std::stod(rows[0][1]), std::stod(rows[0][2])) < 1e-9);
}

TEST_CASE("fit-sigmoid recovers planted parameters from a file", "[cli]") {
    const auto s = oracle::synthesize(4.917e-6, -2e6, 2.618e-6, 10e-6, 200);
    const fs::path input = scratch_dir() / "planted.csv";
    {
        std::ofstream f(input);
        f << "x,y\n";
        f.precision(17);
        for (std::size_t k = 0; k < s.x.size(); ++k) {
            f << s.x[k] << "," << s.y[k] << "\n";
        }
    }
    const auto r = invoke({"fit-sigmoid", "--input", input.string()});
    REQUIRE(r.code == 0);
    double a = 0, b = 0, c = 0;
    for (const auto& row : rows_of(r.out)) {
        if (row[0] == "a") a = std::stod(row[1]);
        if (row[0] == "b") b = std::stod(row[1]);
        if (row[0] == "c") c = std::stod(row[1]);
    }
    CHECK(oracle::rel_diff(a, 4.917e-6) < 1e-3);
    CHECK(oracle::rel_diff(b, -2e6) < 1e-3);
    CHECK(oracle::rel_diff(c, 2.618e-6) < 1e-3);
}

TEST_CASE("rerun from an emitted file is byte-identical", "[cli]") {
    const fs::path dir = scratch_dir();
    for (const std::string fmt : {"csv", "json"}) {
        const fs::path first = dir / ("sweep_a." + fmt);
        const fs::path second = dir / ("sweep_b." + fmt);
        auto r = invoke({"sweep", "--config", XBARSIM_SOURCE_DIR "/configs/example.yaml", "--set",
                         "analysis.sweep.count=3", "--format", fmt, "--out", first.string()});
        REQUIRE(r.code == 0);
        CHECK(r.out.empty());
        r = invoke({"sweep", "--rerun", first.string(), "--out", second.string()});
        REQUIRE(r.code == 0);
        CHECK(slurp(first) == slurp(second));
    }
}

TEST_CASE("exit codes", "[cli]") {
    CHECK(invoke({"dotprod", "--set", "crossbar.n_row=3"}).code == 1);
    CHECK(invoke({"dotprod", "--set", "device.g_on=1.0e-6"}).code == 1);
    CHECK(invoke({"frobnicate"}).code == 1);
    CHECK(invoke({"dotprod", "--format", "xml"}).code == 1);
    CHECK(invoke({"fit-sigmoid"}).code == 1);
    // Ideal wires with an ideal current drive on a row with no path: singular.
    CHECK(invoke({"dotprod", "--set", "mode=current", "--set", "parasitics.r_t=1.0e300"}).code ==
          2);
    CHECK(invoke({"energy", "--set", "parasitics.c_p=1.0e-12", "--set", "parasitics.r_t=1.0e4",
                  "--set", "analysis.max_time=1.0e-15"})
              .code == 3);
    const auto ok = invoke({"presets", "--format", "json"});
    CHECK(ok.code == 0);
    CHECK(nlohmann::json::parse(ok.out)["command"] == "presets");
}

TEST_CASE("nothing is written outside the output path", "[cli]") {
    const fs::path dir = scratch_dir() / "isolated";
    fs::remove_all(dir);
    fs::create_directories(dir);
    const fs::path target = dir / "result.csv";
    REQUIRE(invoke({"bandwidth", "--set", "parasitics.c_p=1.0e-15", "--set", "parasitics.r_p=1",
                    "--out", target.string()})
                .code == 0);
    std::size_t files = 0;
    for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir)) {
        ++files;
    }
    CHECK(files == 1);
}

TEST_CASE("neuron-transfer on explicit currents", "[cli]") {
    const auto r = invoke({"neuron-transfer", "--current", "2.618e-6", "--current", "0"});
    REQUIRE(r.code == 0);
    const auto rows = rows_of(r.out);
    REQUIRE(rows.size() == 2);
    CHECK(oracle::rel_diff(std::stod(rows[0][1]), 2.4585e-6) < 1e-12);
}

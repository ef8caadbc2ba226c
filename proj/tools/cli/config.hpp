#pragma once

#include "xbarsim/analysis.hpp"
#include "xbarsim/device.hpp"
#include "xbarsim/error.hpp"
#include "xbarsim/network.hpp"
#include "xbarsim/neuron.hpp"

#include "json.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace xbarsim::cli {

// Problems with the configuration document itself. Carries the offending
// key path and, for syntax errors, the 1-based line and column.
class ConfigError : public InvalidInput {
public:
    ConfigError(const std::string& what, std::string key_path, int line = 0, int column = 0)
        : InvalidInput(what), key_path_(std::move(key_path)), line_(line), column_(column) {}

    const std::string& key_path() const noexcept { return key_path_; }
    int line() const noexcept { return line_; }
    int column() const noexcept { return column_; }

private:
    std::string key_path_;
    int line_;
    int column_;
};

struct DeviceBlock {
    double g_off = 1e-5;
    double g_on = 1e-3;
    double v_th = 1.0;
    double k_mob = 1e4;
};

enum class ConductanceKind { Uniform, Matrix, Random };

struct ConductanceBlock {
    ConductanceKind kind = ConductanceKind::Uniform;
    double value = 1e-4;                      // uniform
    std::vector<std::vector<double>> matrix;  // matrix
    double min = 1e-5;                        // random
    double max = 1e-3;
    std::uint64_t seed = 0;                   // random
};

struct NormalizeBlock {
    double target = 0.0;
    std::size_t free_column = 0;
};

struct CrossbarBlock {
    std::size_t n_rows = 2;
    std::size_t n_cols = 2;
    ConductanceBlock conductance;
    std::optional<NormalizeBlock> normalize_rows;
    double source_resistance = 0.0;
};

enum class DriveKind { Uniform, Values, Random };

struct DriveBlock {
    DriveKind kind = DriveKind::Uniform;
    double value = 1.0;  // uniform; 1 V in voltage mode, 1 uA in current mode by default
    std::vector<double> values;
    double min = 0.0;
    double max = 1.0;
    std::uint64_t seed = 0;
};

struct NeuronBlock {
    std::optional<std::string> preset = std::string("cm-1.8");
    SigmoidParams inline_params;  // used when preset is empty
};

enum class Spacing { Linear, Log };

struct SweepBlock {
    std::string parameter = "r_t";
    std::vector<double> values;
    // Range form, expanded into values when values is empty.
    std::optional<double> start;
    std::optional<double> stop;
    std::size_t count = 0;
    Spacing spacing = Spacing::Log;
    std::vector<std::string> metrics{"bandwidth", "error_vm"};
};

struct MonteCarloBlock {
    std::size_t samples = 200;
    double g_rel_std = 0.01;
    double neuron_rel_std = 0.01;
    std::string observable = "sigmoid_fit";
    std::size_t ramp_points = 101;
};

struct AnalysisBlock {
    std::uint64_t seed = 42;
    std::size_t column = 0;
    double settle_rel = 0.01;
    std::optional<double> energy_window;
    double max_time = 1e-3;
    double steps_per_tau = 200;
    SweepBlock sweep;
    MonteCarloBlock monte_carlo;
    std::string fit_input;          // CSV of x,y samples for fit-sigmoid
    std::vector<double> currents;   // explicit inputs for neuron-transfer
};

enum class OutputFormat { Csv, Json };

struct OutputBlock {
    std::string path;  // empty writes to standard output
    OutputFormat format = OutputFormat::Csv;
};

struct RunConfig {
    DeviceBlock device;
    CrossbarBlock crossbar;
    DriveMode mode = DriveMode::Voltage;
    DriveBlock drive;
    Parasitics parasitics;
    NeuronBlock neuron;
    AnalysisBlock analysis;
    OutputBlock output;

    MemristorDevice make_device() const;
    // Conductance matrix after generation and optional row normalization.
    CrossbarConfig make_crossbar() const;
    std::vector<double> make_drive() const;
    SigmoidParams neuron_params() const;
    SweepSpec make_sweep() const;
    McSpec make_monte_carlo() const;
    EnergyOptions energy_options() const;
};

// "a.b.c=value" overrides applied on top of the document before validation.
using Override = std::pair<std::string, std::string>;
Override parse_override(std::string_view text);

// Strict parse: unknown keys, type mismatches and invariant violations all
// throw ConfigError. `source` names the document in messages.
RunConfig parse_config(std::string_view text, std::string_view source = "<config>",
                       const std::vector<Override>& overrides = {});
RunConfig load_config(const std::string& path, const std::vector<Override>& overrides = {});
RunConfig default_config(const std::vector<Override>& overrides = {});

// Fully resolved document; parse_config(to_json(c).dump()) reproduces c.
nlohmann::ordered_json to_json(const RunConfig& cfg);

// Pulls the resolved configuration back out of a CSV or JSON result file.
std::string extract_embedded_config(const std::string& result_path);

}  // namespace xbarsim::cli

#pragma once

#include "xbarsim/device.hpp"
#include "xbarsim/network.hpp"
#include "xbarsim/neuron.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace xbarsim {

// ---------------------------------------------------------------------------
// Bandwidth
// ---------------------------------------------------------------------------

struct BandwidthResult {
    double hz = 0.0;          // +inf when the column has no pole
    bool infinite = false;
    bool multi_pole = false;  // |H(f)| was seen rising; first crossing reported
};

// -3 dB frequency of |I_col(f)| / |I_col(0)|: decade sweep upward from
// 1 Hz, then bisection in log-frequency to 0.1 % relative.
BandwidthResult compute_bandwidth(const CrossbarConfig& cfg, std::span<const double> drive,
                                  std::size_t column);

// ---------------------------------------------------------------------------
// Energy
// ---------------------------------------------------------------------------

struct EnergyOptions {
    double settle_rel = 0.01;
    // When set, integrate over exactly this window instead of the settling rule.
    std::optional<double> fixed_window;
    double max_time = 1e-3;      // give up (Timeout) beyond this simulated time
    double steps_per_tau = 200;  // time steps per dominant time constant
    std::size_t damping_steps = 2;
};

struct EnergyResult {
    double joules = 0.0;
    double window = 0.0;       // integration window, seconds
    double settle_time = 0.0;  // zero when a fixed window was requested
    double dt = 0.0;
};

// Source energy for a step drive applied at t = 0. Unless a fixed window is
// given, the window is twice the time after which every column current stays
// within settle_rel of its DC value.
EnergyResult compute_energy(const CrossbarConfig& cfg, std::span<const double> drive,
                            const EnergyOptions& opts = {});

// ---------------------------------------------------------------------------
// Sweeps
// ---------------------------------------------------------------------------

enum class SweepParameter { TerminalResistance, WireResistance, NodeCapacitance, GScale,
                            TerminalConductance };
enum class Metric { Bandwidth, ErrorVoltageMode, ErrorCurrentMode, Energy };

std::string_view to_string(SweepParameter p) noexcept;
std::string_view to_string(Metric m) noexcept;
// Column header including the unit suffix, e.g. "r_t_ohm" or "bandwidth_hz".
std::string_view column_name(SweepParameter p) noexcept;
std::string_view column_name(Metric m) noexcept;
// Accepts r_t, r_p, c_p, g_scale, g_t and bandwidth, error_vm, error_cm, energy.
SweepParameter parse_sweep_parameter(std::string_view name);
Metric parse_metric(std::string_view name);

struct SweepSpec {
    SweepParameter parameter = SweepParameter::TerminalResistance;
    std::vector<double> values;
    std::vector<Metric> metrics;
    std::size_t column = 0;  // column used for bandwidth
    EnergyOptions energy;
};

struct MetricColumn {
    Metric metric;
    std::vector<double> values;
};

struct SweepResult {
    SweepSpec spec;
    std::vector<MetricColumn> columns;
    // Inputs needed to reproduce the sweep.
    CrossbarConfig base;
    std::vector<double> drive;
    std::vector<std::string> warnings;

    const std::vector<double>& axis_values() const noexcept { return spec.values; }
    const std::vector<double>& metric(Metric m) const;
};

// Applies one axis value to a copy of cfg and checks it against the device.
CrossbarConfig apply_sweep_value(const MemristorDevice& dev, const CrossbarConfig& cfg,
                                 SweepParameter p, double value);

// Circuit-vs-ideal error for the config's own mode; `expected` names the
// mode the caller asks for and must match cfg.mode.
double compute_error(const CrossbarConfig& cfg, std::span<const double> drive,
                     DriveMode expected);

SweepResult run_sweep(const MemristorDevice& dev, const CrossbarConfig& cfg,
                      std::span<const double> drive, const SweepSpec& spec);

// ---------------------------------------------------------------------------
// Monte Carlo
// ---------------------------------------------------------------------------

enum class McObservable { SigmoidFit, DotProductError };

std::string_view to_string(McObservable o) noexcept;
McObservable parse_observable(std::string_view name);

struct McSpec {
    double g_rel_std = 0.0;       // multiplicative std on every conductance
    double neuron_rel_std = 0.0;  // multiplicative std on a, b and c
    std::size_t samples = 200;
    std::uint64_t seed = 0;
    McObservable observable = McObservable::SigmoidFit;
    SigmoidParams neuron;         // used by SigmoidFit
    std::size_t column = 0;       // column fed to the neuron
    std::size_t ramp_points = 101;
};

struct McParameterStats {
    std::string name;
    double nominal = 0.0;
    double mean = 0.0;
    double std = 0.0;  // sample standard deviation, zero for one sample
};

struct McStats {
    std::size_t n_samples = 0;
    std::uint64_t seed = 0;
    std::vector<McParameterStats> parameters;
    double clamped_fraction = 0.0;
    bool truncation_warning = false;  // more than half the draws were clamped
    std::size_t unconverged_fits = 0;

    const McParameterStats& parameter(std::string_view name) const;
};

// SigmoidFit drives the crossbar with drive * s for a ramp s in [0, s_max]
// (s_max puts the nominal column current at 2c), passes the column current
// through the perturbed neuron and fits a, b, c against s. DotProductError
// compares the perturbed circuit with the ideal output of the nominal
// conductances. Draws for sample k depend only on (seed, k).
McStats monte_carlo(const MemristorDevice& dev, const CrossbarConfig& cfg,
                    std::span<const double> drive, const McSpec& spec);

}  // namespace xbarsim

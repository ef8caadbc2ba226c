#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace xbarsim {

enum class SignalUnit { Volt, Ampere };

std::string_view to_string(SignalUnit unit) noexcept;

// y = a / (1 + exp(b (x - c))). The input x is the column current in
// amperes; the output carries the neuron's own unit, volts for the
// voltage-mode circuit and amperes for the current-mode one.
struct SigmoidParams {
    double a = 1.0;
    double b = -1.0;
    double c = 0.0;
    std::optional<double> rmse;
    SignalUnit output_unit = SignalUnit::Ampere;

    // a > 0, b != 0, all finite.
    void validate() const;
};

double sigmoid(const SigmoidParams& p, double x) noexcept;

// Small-signal quantities of the low-impedance input stage.
struct SmallSignalParams {
    double r_ds = 0.0;  // ohms
    double g_m = 0.0;   // siemens
    double gain = 0.0;  // open-loop gain of the feedback amplifier
};

// r_ds / (1 + g_m r_ds A)
double input_impedance(const SmallSignalParams& s);

struct NeuronPreset {
    std::string label;
    SigmoidParams params;
    double z_in = 0.0;       // ohms, enters the crossbar as r_t
    double bandwidth = 0.0;  // hertz
    double power = 0.0;      // watts
    double vdd = 0.0;        // volts
};

// Published operating points: "vm-1.8", "cm-1.8", "cm-1.5", "cm-1.0".
const std::vector<NeuronPreset>& builtin_presets();

// Throws InvalidInput for an unknown label.
const NeuronPreset& find_preset(std::string_view label);

double neuron_transfer(const NeuronPreset& preset, double column_current) noexcept;

struct FitResult {
    SigmoidParams params;      // rmse always set
    double initial_rmse = 0.0; // rmse of the deterministic starting guess
    std::size_t iterations = 0;
    bool converged = false;
};

// Damped Gauss-Newton least squares on (x, y) samples. Needs at least four
// samples and two distinct x values; throws NoFit when y is constant.
FitResult fit_sigmoid(std::span<const double> x, std::span<const double> y,
                      SignalUnit output_unit = SignalUnit::Ampere);

}  // namespace xbarsim

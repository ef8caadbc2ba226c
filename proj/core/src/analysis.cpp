#include "xbarsim/analysis.hpp"

#include "xbarsim/error.hpp"
#include "xbarsim/ideal.hpp"
#include "xbarsim/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace xbarsim {

namespace {

constexpr double kHalfPower = 0.70710678118654752440;

double transfer_magnitude(const NodalSystem& sys, std::size_t column, double f, double dc) {
    const AcSolution ac = solve_ac(sys, f);
    return std::abs(ac.column_phasors[static_cast<Eigen::Index>(column)]) / dc;
}

}  // namespace

// ---------------------------------------------------------------------------
// Bandwidth
// ---------------------------------------------------------------------------

BandwidthResult compute_bandwidth(const CrossbarConfig& cfg, std::span<const double> drive,
                                  std::size_t column) {
    if (column >= cfg.n_cols()) {
        throw InvalidInput("bandwidth column index outside the array");
    }
    BandwidthResult out;
    if (cfg.parasitics.c_p == 0.0) {
        out.infinite = true;
        out.hz = std::numeric_limits<double>::infinity();
        return out;
    }
    const NodalSystem sys = assemble(cfg, drive);
    const double dc = std::abs(solve_dc(sys).column_currents[static_cast<Eigen::Index>(column)]);
    if (!(dc > 0.0)) {
        throw InvalidInput("bandwidth column carries no DC current under this drive");
    }

    // Coarse pass: decade steps until the response drops below -3 dB.
    double f_lo = 1.0;
    double h_lo = transfer_magnitude(sys, column, f_lo, dc);
    while (h_lo < kHalfPower && f_lo > 1e-9) {
        f_lo /= 10.0;
        h_lo = transfer_magnitude(sys, column, f_lo, dc);
    }
    double f_hi = f_lo;
    double h_hi = h_lo;
    double h_prev = h_lo;
    constexpr double kMaxFrequency = 1e18;
    while (h_hi >= kHalfPower) {
        f_lo = f_hi;
        h_lo = h_hi;
        f_hi *= 10.0;
        if (f_hi > kMaxFrequency) {
            out.infinite = true;
            out.hz = std::numeric_limits<double>::infinity();
            return out;
        }
        h_hi = transfer_magnitude(sys, column, f_hi, dc);
        if (h_hi > h_prev * (1.0 + 1e-9)) {
            out.multi_pole = true;
        }
        h_prev = h_hi;
    }

    // Refine in log-frequency until the bracket is within 0.1 %.
    while (f_hi / f_lo - 1.0 > 1e-3) {
        const double f_mid = std::sqrt(f_lo * f_hi);
        const double h_mid = transfer_magnitude(sys, column, f_mid, dc);
        if (h_mid > h_lo * (1.0 + 1e-9) || h_mid < h_hi * (1.0 - 1e-9)) {
            out.multi_pole = true;
        }
        if (h_mid >= kHalfPower) {
            f_lo = f_mid;
            h_lo = h_mid;
        } else {
            f_hi = f_mid;
            h_hi = h_mid;
        }
    }
    out.hz = std::sqrt(f_lo * f_hi);
    return out;
}

// ---------------------------------------------------------------------------
// Energy
// ---------------------------------------------------------------------------

EnergyResult compute_energy(const CrossbarConfig& cfg, std::span<const double> drive,
                            const EnergyOptions& opts) {
    if (!(opts.settle_rel > 0.0 && opts.settle_rel < 1.0)) {
        throw InvalidInput("settle_rel must lie in (0, 1)");
    }
    if (!(opts.steps_per_tau >= 1.0) || !(opts.max_time > 0.0)) {
        throw InvalidInput("energy options need steps_per_tau >= 1 and max_time > 0");
    }
    const NodalSystem sys = assemble(cfg, drive);
    const double tau = dominant_time_constant(sys);

    EnergyResult out;
    if (opts.fixed_window) {
        const double window = *opts.fixed_window;
        if (!std::isfinite(window) || !(window > 0.0)) {
            throw InvalidInput("fixed energy window must be positive");
        }
        const double dt = tau > 0.0 ? std::min(window, tau / opts.steps_per_tau) : window;
        TransientOptions topt{window, dt, opts.damping_steps, false};
        const TransientResult tr = solve_transient(sys, topt);
        out.joules = tr.energy_until(window);
        out.window = window;
        out.dt = tr.dt;
        return out;
    }
    if (tau == 0.0) {
        // Purely resistive: settled at t = 0+, empty window.
        out.joules = 0.0;
        return out;
    }

    const Eigen::VectorXd i_dc = solve_dc(sys).column_currents;
    const double i_scale = i_dc.size() > 0 ? i_dc.cwiseAbs().maxCoeff() : 0.0;
    Eigen::VectorXd band = (opts.settle_rel * i_dc.cwiseAbs()).cwiseMax(
        opts.settle_rel * 1e-6 * i_scale);

    const double dt = tau / opts.steps_per_tau;
    double horizon = 10.0 * tau;
    for (;;) {
        const double t_end = std::min(horizon, opts.max_time);
        TransientOptions topt{t_end, std::min(dt, t_end), opts.damping_steps, false};
        const TransientResult tr = solve_transient(sys, topt);

        std::ptrdiff_t last_out = -1;
        double worst_end = 0.0;
        for (std::size_t k = 0; k < tr.time.size(); ++k) {
            const Eigen::VectorXd dev = (tr.column_currents[k] - i_dc).cwiseAbs();
            if ((dev.array() > band.array()).any()) {
                last_out = static_cast<std::ptrdiff_t>(k);
            }
            if (k + 1 == tr.time.size() && i_scale > 0.0) {
                worst_end = (dev.array() / i_dc.cwiseAbs().cwiseMax(1e-6 * i_scale).array())
                                .maxCoeff();
            }
        }
        const std::size_t settled_at = static_cast<std::size_t>(last_out + 1);
        if (settled_at < tr.time.size()) {
            const double t_settle = tr.time[settled_at];
            if (2.0 * t_settle <= tr.time.back()) {
                out.settle_time = t_settle;
                out.window = 2.0 * t_settle;
                out.joules = tr.energy_until(out.window);
                out.dt = tr.dt;
                return out;
            }
        }
        if (t_end >= opts.max_time) {
            std::ostringstream msg;
            msg << "column currents did not settle within " << opts.max_time
                << " s (largest relative deviation " << worst_end << ")";
            throw Timeout(msg.str(), worst_end);
        }
        horizon *= 2.0;
    }
}

// ---------------------------------------------------------------------------
// Sweeps
// ---------------------------------------------------------------------------

std::string_view to_string(SweepParameter p) noexcept {
    switch (p) {
    case SweepParameter::TerminalResistance: return "r_t";
    case SweepParameter::WireResistance: return "r_p";
    case SweepParameter::NodeCapacitance: return "c_p";
    case SweepParameter::GScale: return "g_scale";
    case SweepParameter::TerminalConductance: return "g_t";
    }
    return "?";
}

std::string_view column_name(SweepParameter p) noexcept {
    switch (p) {
    case SweepParameter::TerminalResistance: return "r_t_ohm";
    case SweepParameter::WireResistance: return "r_p_ohm";
    case SweepParameter::NodeCapacitance: return "c_p_f";
    case SweepParameter::GScale: return "g_scale";
    case SweepParameter::TerminalConductance: return "g_t_s";
    }
    return "?";
}

std::string_view to_string(Metric m) noexcept {
    switch (m) {
    case Metric::Bandwidth: return "bandwidth";
    case Metric::ErrorVoltageMode: return "error_vm";
    case Metric::ErrorCurrentMode: return "error_cm";
    case Metric::Energy: return "energy";
    }
    return "?";
}

std::string_view column_name(Metric m) noexcept {
    switch (m) {
    case Metric::Bandwidth: return "bandwidth_hz";
    case Metric::ErrorVoltageMode: return "error_vm";
    case Metric::ErrorCurrentMode: return "error_cm";
    case Metric::Energy: return "energy_j";
    }
    return "?";
}

SweepParameter parse_sweep_parameter(std::string_view name) {
    for (auto p : {SweepParameter::TerminalResistance, SweepParameter::WireResistance,
                   SweepParameter::NodeCapacitance, SweepParameter::GScale,
                   SweepParameter::TerminalConductance}) {
        if (to_string(p) == name) {
            return p;
        }
    }
    throw InvalidInput("unknown sweep parameter '" + std::string(name) +
                       "' (expected r_t, r_p, c_p, g_scale or g_t)");
}

Metric parse_metric(std::string_view name) {
    for (auto m : {Metric::Bandwidth, Metric::ErrorVoltageMode, Metric::ErrorCurrentMode,
                   Metric::Energy}) {
        if (to_string(m) == name) {
            return m;
        }
    }
    throw InvalidInput("unknown metric '" + std::string(name) +
                       "' (expected bandwidth, error_vm, error_cm or energy)");
}

const std::vector<double>& SweepResult::metric(Metric m) const {
    for (const auto& c : columns) {
        if (c.metric == m) {
            return c.values;
        }
    }
    throw InvalidInput("sweep result has no column '" + std::string(to_string(m)) + "'");
}

CrossbarConfig apply_sweep_value(const MemristorDevice& dev, const CrossbarConfig& cfg,
                                 SweepParameter p, double value) {
    if (!std::isfinite(value) || !(value > 0.0)) {
        throw InvalidInput("sweep values must be finite and positive");
    }
    CrossbarConfig out = cfg;
    switch (p) {
    case SweepParameter::TerminalResistance: out.parasitics.r_t = value; break;
    case SweepParameter::WireResistance: out.parasitics.r_p = value; break;
    case SweepParameter::NodeCapacitance: out.parasitics.c_p = value; break;
    case SweepParameter::GScale: out.g = cfg.g * value; break;
    case SweepParameter::TerminalConductance: out.parasitics.r_t = 1.0 / value; break;
    }
    out.validate(dev);
    return out;
}

double compute_error(const CrossbarConfig& cfg, std::span<const double> drive,
                     DriveMode expected) {
    if (cfg.mode != expected) {
        throw InvalidInput("error_" + std::string(expected == DriveMode::Voltage ? "vm" : "cm") +
                           " needs a " + std::string(to_string(expected)) +
                           "-mode configuration");
    }
    const DcSolution dc = solve_dc(assemble(cfg, drive));
    const IdealOutput ideal = expected == DriveMode::Voltage ? ideal_voltage_mode(cfg.g, drive)
                                                             : ideal_current_mode(cfg.g, drive);
    return dot_product_error(dc.column_currents, ideal.column_currents);
}

SweepResult run_sweep(const MemristorDevice& dev, const CrossbarConfig& cfg,
                      std::span<const double> drive, const SweepSpec& spec) {
    if (spec.values.empty()) {
        throw InvalidInput("sweep needs at least one axis value");
    }
    if (spec.metrics.empty()) {
        throw InvalidInput("sweep needs at least one metric");
    }
    cfg.validate(dev);

    SweepResult out;
    out.spec = spec;
    out.base = cfg;
    out.drive.assign(drive.begin(), drive.end());
    for (Metric m : spec.metrics) {
        out.columns.push_back({m, {}});
    }
    for (double value : spec.values) {
        const CrossbarConfig point = apply_sweep_value(dev, cfg, spec.parameter, value);
        for (auto& col : out.columns) {
            double v = 0.0;
            switch (col.metric) {
            case Metric::Bandwidth: {
                const BandwidthResult bw = compute_bandwidth(point, drive, spec.column);
                if (bw.multi_pole) {
                    std::ostringstream msg;
                    msg.precision(17);
                    msg << "multi-pole response at " << to_string(spec.parameter) << " = "
                        << value << "; first -3 dB crossing reported";
                    out.warnings.push_back(msg.str());
                }
                v = bw.hz;
                break;
            }
            case Metric::ErrorVoltageMode:
                v = compute_error(point, drive, DriveMode::Voltage);
                break;
            case Metric::ErrorCurrentMode:
                v = compute_error(point, drive, DriveMode::Current);
                break;
            case Metric::Energy:
                v = compute_energy(point, drive, spec.energy).joules;
                break;
            }
            col.values.push_back(v);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Monte Carlo
// ---------------------------------------------------------------------------

std::string_view to_string(McObservable o) noexcept {
    return o == McObservable::SigmoidFit ? "sigmoid_fit" : "dot_product_error";
}

McObservable parse_observable(std::string_view name) {
    if (name == "sigmoid_fit") {
        return McObservable::SigmoidFit;
    }
    if (name == "dot_product_error") {
        return McObservable::DotProductError;
    }
    throw InvalidInput("unknown Monte Carlo observable '" + std::string(name) +
                       "' (expected sigmoid_fit or dot_product_error)");
}

const McParameterStats& McStats::parameter(std::string_view name) const {
    for (const auto& p : parameters) {
        if (p.name == name) {
            return p;
        }
    }
    throw InvalidInput("Monte Carlo result has no parameter '" + std::string(name) + "'");
}

namespace {

// Independent stream per sample so the draw never depends on evaluation order.
std::mt19937_64 sample_engine(std::uint64_t seed, std::uint64_t index) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(index),
                      static_cast<std::uint32_t>(index >> 32)};
    return std::mt19937_64(seq);
}

double column_current(const CrossbarConfig& cfg, std::span<const double> drive,
                      std::size_t column) {
    return solve_dc(assemble(cfg, drive)).column_currents[static_cast<Eigen::Index>(column)];
}

}  // namespace

McStats monte_carlo(const MemristorDevice& dev, const CrossbarConfig& cfg,
                    std::span<const double> drive, const McSpec& spec) {
    if (spec.samples < 1) {
        throw InvalidInput("Monte Carlo needs at least one sample");
    }
    if (!std::isfinite(spec.g_rel_std) || spec.g_rel_std < 0.0 ||
        !std::isfinite(spec.neuron_rel_std) || spec.neuron_rel_std < 0.0) {
        throw InvalidInput("Monte Carlo standard deviations must be finite and >= 0");
    }
    if (spec.column >= cfg.n_cols()) {
        throw InvalidInput("Monte Carlo column index outside the array");
    }
    if (spec.ramp_points < 4) {
        throw InvalidInput("Monte Carlo ramp needs at least 4 points");
    }
    cfg.validate(dev);

    std::vector<std::string> names;
    std::vector<double> nominal;
    double ramp_max = 0.0;
    Eigen::VectorXd ideal_nominal;
    if (spec.observable == McObservable::SigmoidFit) {
        spec.neuron.validate();
        const double i1 = column_current(cfg, drive, spec.column);
        if (!(std::abs(i1) > 0.0)) {
            throw InvalidInput("Monte Carlo column carries no current under this drive");
        }
        // In ramp units the nominal sigmoid is a / (1 + exp(b i1 (s - c / i1))).
        ramp_max = 2.0 * spec.neuron.c / i1;
        if (!(ramp_max > 0.0)) {
            throw InvalidInput("neuron offset c and the column current must share a sign");
        }
        names = {"a", "b", "c"};
        nominal = {spec.neuron.a, spec.neuron.b * i1, spec.neuron.c / i1};
    } else {
        ideal_nominal = cfg.mode == DriveMode::Voltage
                            ? ideal_voltage_mode(cfg.g, drive).column_currents
                            : ideal_current_mode(cfg.g, drive).column_currents;
        names = {"error"};
        nominal = {compute_error(cfg, drive, cfg.mode)};
    }

    const std::size_t n = spec.samples;
    std::vector<std::vector<double>> draws(names.size(), std::vector<double>(n));
    std::size_t clamped = 0;
    std::size_t drawn = 0;
    std::size_t unconverged = 0;

    std::vector<double> ramp(spec.ramp_points);
    for (std::size_t k = 0; k < ramp.size(); ++k) {
        ramp[k] = ramp_max * static_cast<double>(k) / static_cast<double>(ramp.size() - 1);
    }

    for (std::size_t s = 0; s < n; ++s) {
        auto rng = sample_engine(spec.seed, s);
        std::normal_distribution<double> normal(0.0, 1.0);

        CrossbarConfig inst = cfg;
        for (Eigen::Index i = 0; i < inst.g.rows(); ++i) {
            for (Eigen::Index j = 0; j < inst.g.cols(); ++j) {
                const double raw = cfg.g(i, j) * (1.0 + spec.g_rel_std * normal(rng));
                const double g = std::clamp(raw, dev.g_off(), dev.g_on());
                clamped += g != raw ? 1 : 0;
                ++drawn;
                inst.g(i, j) = g;
            }
        }

        if (spec.observable == McObservable::SigmoidFit) {
            SigmoidParams neuron = spec.neuron;
            neuron.a *= 1.0 + spec.neuron_rel_std * normal(rng);
            neuron.b *= 1.0 + spec.neuron_rel_std * normal(rng);
            neuron.c *= 1.0 + spec.neuron_rel_std * normal(rng);
            neuron.rmse.reset();
            // The network is linear, so one solve gives the whole ramp.
            const double i1 = column_current(inst, drive, spec.column);
            std::vector<double> y(ramp.size());
            for (std::size_t k = 0; k < ramp.size(); ++k) {
                y[k] = sigmoid(neuron, ramp[k] * i1);
            }
            const FitResult fit = fit_sigmoid(ramp, y, neuron.output_unit);
            unconverged += fit.converged ? 0 : 1;
            draws[0][s] = fit.params.a;
            draws[1][s] = fit.params.b;
            draws[2][s] = fit.params.c;
        } else {
            const DcSolution dc = solve_dc(assemble(inst, drive));
            draws[0][s] = dot_product_error(dc.column_currents, ideal_nominal);
        }
    }

    McStats out;
    out.n_samples = n;
    out.seed = spec.seed;
    out.unconverged_fits = unconverged;
    out.clamped_fraction = drawn > 0 ? static_cast<double>(clamped) / static_cast<double>(drawn) : 0.0;
    out.truncation_warning = out.clamped_fraction > 0.5;
    for (std::size_t p = 0; p < names.size(); ++p) {
        const auto& v = draws[p];
        // Shifted by the first draw so identical draws give exactly zero spread.
        double shift = 0.0;
        for (double x : v) {
            shift += x - v[0];
        }
        const double mean = v[0] + shift / static_cast<double>(n);
        double ss = 0.0;
        for (double x : v) {
            ss += (x - mean) * (x - mean);
        }
        const double sd = n > 1 ? std::sqrt(ss / static_cast<double>(n - 1)) : 0.0;
        out.parameters.push_back({names[p], nominal[p], mean, sd});
    }
    return out;
}

}  // namespace xbarsim

#pragma once

#include <span>

namespace xbarsim {

// Linear-drift memristor. Conductance interpolates between the low-dopant
// bound g_off and the high-dopant bound g_on according to a unitless state
// x in [0, 1]; the state only moves while |v| exceeds the threshold.
class MemristorDevice {
public:
    // Throws InvalidInput unless 0 < g_off < g_on, v_th >= 0, k_mob > 0.
    MemristorDevice(double g_off, double g_on, double v_th, double k_mob);

    double g_off() const noexcept { return g_off_; }
    double g_on() const noexcept { return g_on_; }
    double v_th() const noexcept { return v_th_; }
    // Proportionality between device current and dx/dt, in 1/(A*s).
    double k_mob() const noexcept { return k_mob_; }

    bool admits(double g) const noexcept { return g >= g_off_ && g <= g_on_; }

private:
    double g_off_;
    double g_on_;
    double v_th_;
    double k_mob_;
};

class DeviceState {
public:
    DeviceState() = default;
    // Values outside [0, 1] saturate at the nearest bound.
    explicit DeviceState(double x);

    double x() const noexcept { return x_; }

private:
    double x_ = 0.0;
};

double conductance(const MemristorDevice& dev, DeviceState s) noexcept;

double device_current(const MemristorDevice& dev, DeviceState s, double v) noexcept;

// Forward-Euler integration of dx/dt = k_mob * i(t) over a waveform sampled
// every dt seconds. Samples with |v| <= v_th leave the state untouched.
DeviceState evolve_state(const MemristorDevice& dev, DeviceState s,
                         std::span<const double> v_waveform, double dt);

// Inverse of conductance(); throws OutOfRange outside [g_off, g_on].
DeviceState program_to_conductance(const MemristorDevice& dev, double g_target);

}  // namespace xbarsim

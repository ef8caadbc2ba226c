#include "xbarsim/device.hpp"

#include "xbarsim/error.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace xbarsim {

MemristorDevice::MemristorDevice(double g_off, double g_on, double v_th, double k_mob)
    : g_off_(g_off), g_on_(g_on), v_th_(v_th), k_mob_(k_mob) {
    if (!std::isfinite(g_off) || !std::isfinite(g_on) || !(g_off > 0.0) || !(g_off < g_on)) {
        throw InvalidInput("memristor device requires 0 < g_off < g_on");
    }
    if (!std::isfinite(v_th) || v_th < 0.0) {
        throw InvalidInput("memristor device requires v_th >= 0");
    }
    if (!std::isfinite(k_mob) || !(k_mob > 0.0)) {
        throw InvalidInput("memristor device requires k_mob > 0");
    }
}

DeviceState::DeviceState(double x) : x_(std::clamp(x, 0.0, 1.0)) {
    if (std::isnan(x)) {
        throw InvalidInput("device state must not be NaN");
    }
}

double conductance(const MemristorDevice& dev, DeviceState s) noexcept {
    return dev.g_off() * (1.0 - s.x()) + dev.g_on() * s.x();
}

double device_current(const MemristorDevice& dev, DeviceState s, double v) noexcept {
    return conductance(dev, s) * v;
}

DeviceState evolve_state(const MemristorDevice& dev, DeviceState s,
                         std::span<const double> v_waveform, double dt) {
    if (!std::isfinite(dt) || !(dt > 0.0)) {
        throw InvalidInput("evolve_state requires dt > 0");
    }
    double x = s.x();
    for (std::size_t k = 0; k < v_waveform.size(); ++k) {
        const double v = v_waveform[k];
        if (!std::isfinite(v)) {
            std::ostringstream msg;
            msg << "evolve_state: non-finite waveform sample at index " << k;
            throw InvalidInput(msg.str());
        }
        if (std::abs(v) <= dev.v_th()) {
            continue;
        }
        const double g = dev.g_off() * (1.0 - x) + dev.g_on() * x;
        x = std::clamp(x + dt * dev.k_mob() * g * v, 0.0, 1.0);
    }
    return DeviceState(x);
}

DeviceState program_to_conductance(const MemristorDevice& dev, double g_target) {
    if (!dev.admits(g_target)) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "target conductance " << g_target << " S outside feasible interval ["
            << dev.g_off() << ", " << dev.g_on() << "] S";
        throw OutOfRange(msg.str(), dev.g_off(), dev.g_on());
    }
    return DeviceState((g_target - dev.g_off()) / (dev.g_on() - dev.g_off()));
}

}  // namespace xbarsim

#include "xbarsim/neuron.hpp"

#include "xbarsim/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace xbarsim {

std::string_view to_string(SignalUnit unit) noexcept {
    return unit == SignalUnit::Volt ? "V" : "A";
}

void SigmoidParams::validate() const {
    if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(c)) {
        throw InvalidInput("sigmoid parameters must be finite");
    }
    if (!(a > 0.0)) {
        throw InvalidInput("sigmoid parameter a must be positive");
    }
    if (b == 0.0) {
        throw InvalidInput("sigmoid parameter b must be non-zero");
    }
    if (rmse && (!std::isfinite(*rmse) || *rmse < 0.0)) {
        throw InvalidInput("sigmoid rmse must be finite and >= 0");
    }
}

double sigmoid(const SigmoidParams& p, double x) noexcept {
    const double z = p.b * (x - p.c);
    if (z > 0.0) {
        // exp(-z) cannot overflow here; the large-z tail decays to 0.
        const double e = std::exp(-z);
        return p.a * e / (1.0 + e);
    }
    return p.a / (1.0 + std::exp(z));
}

double input_impedance(const SmallSignalParams& s) {
    if (!std::isfinite(s.r_ds) || !(s.r_ds > 0.0) || !std::isfinite(s.g_m) || !(s.g_m > 0.0) ||
        !std::isfinite(s.gain) || s.gain < 0.0) {
        throw InvalidInput("small-signal parameters must be finite with r_ds, g_m > 0, gain >= 0");
    }
    return s.r_ds / (1.0 + s.g_m * s.r_ds * s.gain);
}

const std::vector<NeuronPreset>& builtin_presets() {
    static const std::vector<NeuronPreset> presets = [] {
        const SigmoidParams voltage_mode{1.754, -2.13e6, 4.963e-6, 0.06422, SignalUnit::Volt};
        const SigmoidParams current_mode{4.917e-6, -2e6, 2.618e-6, 8.506e-9, SignalUnit::Ampere};
        SigmoidParams current_mode_unfitted = current_mode;
        current_mode_unfitted.rmse.reset();
        return std::vector<NeuronPreset>{
            {"vm-1.8", voltage_mode, 243.0, 50e6, 100.8e-6, 1.8},
            {"cm-1.8", current_mode, 200.0, 6.25e6, 40.5e-6, 1.8},
            {"cm-1.5", current_mode_unfitted, 126.0, 5.2e6, 33.75e-6, 1.5},
            {"cm-1.0", current_mode_unfitted, 274.0, 10e6, 12.5e-6, 1.0},
        };
    }();
    return presets;
}

const NeuronPreset& find_preset(std::string_view label) {
    for (const auto& p : builtin_presets()) {
        if (p.label == label) {
            return p;
        }
    }
    throw InvalidInput("unknown neuron preset '" + std::string(label) +
                       "' (expected vm-1.8, cm-1.8, cm-1.5 or cm-1.0)");
}

double neuron_transfer(const NeuronPreset& preset, double column_current) noexcept {
    return sigmoid(preset.params, column_current);
}

// ---------------------------------------------------------------------------
// Fitting
// ---------------------------------------------------------------------------

namespace {

// Fit in units where max|x| = max|y| = 1 so b and c are O(1).
struct Problem {
    Eigen::VectorXd x;
    Eigen::VectorXd y;

    double cost(const Eigen::Vector3d& p) const {
        double s = 0.0;
        for (Eigen::Index k = 0; k < x.size(); ++k) {
            const double r = y[k] - model(p, x[k]);
            s += r * r;
        }
        return s;
    }

    static double model(const Eigen::Vector3d& p, double xv) {
        return sigmoid(SigmoidParams{p[0], p[1], p[2], std::nullopt, SignalUnit::Ampere}, xv);
    }

    void linearize(const Eigen::Vector3d& p, Eigen::Matrix3d& jtj, Eigen::Vector3d& jtr) const {
        jtj.setZero();
        jtr.setZero();
        for (Eigen::Index k = 0; k < x.size(); ++k) {
            // s = 1 / (1 + e^z); ds/dz = -s (1 - s)
            const double s = model({1.0, p[1], p[2]}, x[k]);
            const double w = s * (1.0 - s);
            const Eigen::Vector3d j(s, -p[0] * w * (x[k] - p[2]), p[0] * p[1] * w);
            const double r = y[k] - p[0] * s;
            jtj.noalias() += j * j.transpose();
            jtr.noalias() += j * r;
        }
    }
};

}  // namespace

FitResult fit_sigmoid(std::span<const double> xs, std::span<const double> ys,
                      SignalUnit output_unit) {
    if (xs.size() != ys.size()) {
        throw InvalidInput("fit_sigmoid: x and y sample counts differ");
    }
    const std::size_t n = xs.size();
    if (n < 4) {
        throw InvalidInput("fit_sigmoid needs at least 4 samples");
    }
    for (std::size_t k = 0; k < n; ++k) {
        if (!std::isfinite(xs[k]) || !std::isfinite(ys[k])) {
            throw InvalidInput("fit_sigmoid: samples must be finite");
        }
    }
    const auto [xmin, xmax] = std::minmax_element(xs.begin(), xs.end());
    if (*xmin == *xmax) {
        throw InvalidInput("fit_sigmoid: all x values are equal");
    }
    const auto [ymin, ymax] = std::minmax_element(ys.begin(), ys.end());
    if (*ymin == *ymax) {
        throw NoFit("fit_sigmoid: constant y data has no sigmoid fit");
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t l, std::size_t r) { return xs[l] < xs[r]; });

    const double sx = std::max(std::abs(*xmin), std::abs(*xmax));
    const double sy = std::max(std::abs(*ymin), std::abs(*ymax));
    Problem prob{Eigen::VectorXd(static_cast<Eigen::Index>(n)),
                 Eigen::VectorXd(static_cast<Eigen::Index>(n))};
    for (std::size_t k = 0; k < n; ++k) {
        prob.x[static_cast<Eigen::Index>(k)] = xs[order[k]] / sx;
        prob.y[static_cast<Eigen::Index>(k)] = ys[order[k]] / sy;
    }

    // Deterministic start: a0 = max y, c0 at the sample nearest a0/2, b0
    // from the central-difference slope there (sigmoid slope at c is -ab/4).
    const double a0 = prob.y.maxCoeff();
    Eigen::Index mid = 0;
    (prob.y.array() - 0.5 * a0).abs().minCoeff(&mid);
    const auto last = static_cast<Eigen::Index>(n) - 1;
    Eigen::Index lo = std::max<Eigen::Index>(mid - 1, 0);
    Eigen::Index hi = std::min<Eigen::Index>(mid + 1, last);
    while (prob.x[hi] == prob.x[lo] && (lo > 0 || hi < last)) {
        lo = std::max<Eigen::Index>(lo - 1, 0);
        hi = std::min<Eigen::Index>(hi + 1, last);
    }
    const double slope =
        prob.x[hi] != prob.x[lo] ? (prob.y[hi] - prob.y[lo]) / (prob.x[hi] - prob.x[lo]) : 0.0;
    double b0 = a0 > 0.0 ? -4.0 * slope / a0 : 0.0;
    if (b0 == 0.0 || !std::isfinite(b0)) {
        const double trend = prob.y[last] - prob.y[0];
        b0 = (trend >= 0.0 ? -4.0 : 4.0) / (prob.x.maxCoeff() - prob.x.minCoeff());
    }
    Eigen::Vector3d p(a0 > 0.0 ? a0 : 1.0, b0, prob.x[mid]);

    double cost = prob.cost(p);
    const double initial_cost = cost;
    double lambda = 1e-3;
    bool converged = false;
    std::size_t it = 0;
    constexpr std::size_t kMaxIterations = 500;

    for (; it < kMaxIterations && !converged; ++it) {
        Eigen::Matrix3d jtj;
        Eigen::Vector3d jtr;
        prob.linearize(p, jtj, jtr);
        if (jtr.cwiseAbs().maxCoeff() <= 1e-300) {
            converged = true;
            break;
        }
        bool accepted = false;
        while (!accepted) {
            Eigen::Matrix3d damped = jtj;
            damped.diagonal() += lambda * jtj.diagonal().cwiseMax(1e-300);
            const Eigen::Vector3d step = damped.ldlt().solve(jtr);
            const Eigen::Vector3d trial = p + step;
            const double trial_cost =
                step.allFinite() && trial[0] > 0.0 ? prob.cost(trial) : HUGE_VAL;
            if (trial_cost < cost) {
                const double drop = cost - trial_cost;
                p = trial;
                cost = trial_cost;
                lambda = std::max(lambda / 10.0, 1e-12);
                accepted = true;
                if (step.norm() <= 1e-13 * p.norm() || drop <= 1e-30 * n) {
                    converged = true;
                }
            } else {
                lambda *= 10.0;
                if (lambda > 1e12) {
                    // No descent direction left at working precision.
                    converged = true;
                    break;
                }
            }
        }
    }

    FitResult out;
    out.params.a = p[0] * sy;
    out.params.b = p[1] / sx;
    out.params.c = p[2] * sx;
    out.params.rmse = std::sqrt(cost / static_cast<double>(n)) * sy;
    out.params.output_unit = output_unit;
    out.initial_rmse = std::sqrt(initial_cost / static_cast<double>(n)) * sy;
    out.iterations = it;
    out.converged = converged;
    return out;
}

}  // namespace xbarsim

#pragma once

#include "xbarsim/network.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

namespace xbarsim {

struct DcSolution {
    Eigen::VectorXd node_voltages;    // per electrical node, volts
    Eigen::VectorXd column_currents;  // per terminal, amperes flowing to ground
    double residual = 0.0;            // ||G v - src||_2 over the unknowns
};

struct AcSolution {
    double frequency = 0.0;
    Eigen::VectorXcd node_phasors;
    Eigen::VectorXcd column_phasors;
};

struct TransientOptions {
    double t_end = 0.0;
    // Zero selects smallest_time_constant(sys) / 20.
    double dt = 0.0;
    // Backward-Euler steps taken before switching to the trapezoidal rule.
    // They damp stiff modes excited by the step when dt is much larger than
    // the fastest time constant.
    std::size_t damping_steps = 0;
    bool record_node_voltages = true;
};

struct TransientResult {
    double dt = 0.0;
    std::vector<double> time;                     // sample instants, time[0] = 0+
    std::vector<Eigen::VectorXd> node_voltages;   // empty unless recorded
    std::vector<Eigen::VectorXd> column_currents; // per sample, per terminal
    std::vector<double> source_power;             // per sample, watts
    // Charge delivered instantaneously at t = 0 to capacitors on nodes held
    // by ideal voltage sources (C V^2 per source node).
    double impulse_energy = 0.0;

    // Impulse plus trapezoidal quadrature of source_power over [0, t].
    double energy_until(double t) const;
    double energy() const { return energy_until(time.empty() ? 0.0 : time.back()); }
};

// Sparse LDL^T solve of G v = src. Throws NumericalFailure carrying the
// offending unknown when G is singular or indefinite.
DcSolution solve_dc(const NodalSystem& sys);

// (G + j 2 pi f C) v = src with the same sources treated as phasors.
AcSolution solve_ac(const NodalSystem& sys, double frequency_hz);

// Step response from v(0) = 0 on every capacitive node; nodes without
// capacitance start at their consistent value so the trapezoidal rule does
// not ring on them.
TransientResult solve_transient(const NodalSystem& sys, const TransientOptions& opts);

// Full-pivoting dense Gaussian elimination on the same system. Only for
// testing; refuses systems with more than 1024 nodes.
DcSolution dense_oracle_solve(const NodalSystem& sys);

// Current through each terminal for a full per-node voltage vector.
Eigen::VectorXd column_currents(const NodalSystem& sys, const Eigen::VectorXd& v);
Eigen::VectorXcd column_currents(const NodalSystem& sys, const Eigen::VectorXcd& v);

// Total instantaneous power delivered by all sources, sum(v_src * i_src).
double source_power(const NodalSystem& sys, const Eigen::VectorXd& v);

// min over capacitive unknowns of C_ii / G_ii; zero when C is empty.
double smallest_time_constant(const NodalSystem& sys);

// Largest eigenvalue of G^{-1} C by power iteration; zero when C is empty.
double dominant_time_constant(const NodalSystem& sys);

}  // namespace xbarsim

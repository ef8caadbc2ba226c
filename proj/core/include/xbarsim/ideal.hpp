#pragma once

#include "xbarsim/device.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <span>

namespace xbarsim {

// Column currents of a crossbar with no parasitics, in amperes.
struct IdealOutput {
    Eigen::VectorXd column_currents;
};

// Voltage mode: I_j = sum_i g[i][j] * v_in[i].
IdealOutput ideal_voltage_mode(const Eigen::MatrixXd& g, std::span<const double> v_in);

// Current mode: each row current divides among the columns in proportion to
// the row's conductances, I_j = sum_i i_in[i] * g[i][j] / sum_k g[i][k].
IdealOutput ideal_current_mode(const Eigen::MatrixXd& g, std::span<const double> i_in);

// Rewrites g[i][free_column] so every row sums to g_row_target. Throws
// InfeasibleNormalization when the required cell leaves [g_off, g_on].
Eigen::MatrixXd normalize_row_conductances(const Eigen::MatrixXd& g, double g_row_target,
                                           std::size_t free_column,
                                           const MemristorDevice& dev);

// mean_j |actual_j - ideal_j| / mean_j |ideal_j|
double dot_product_error(const Eigen::VectorXd& actual, const Eigen::VectorXd& ideal);

inline double dot_product_error(const IdealOutput& actual, const IdealOutput& ideal) {
    return dot_product_error(actual.column_currents, ideal.column_currents);
}

}  // namespace xbarsim

#include "xbarsim/ideal.hpp"

#include "xbarsim/error.hpp"

#include <cmath>
#include <sstream>

namespace xbarsim {

namespace {

void check_shape(const Eigen::MatrixXd& g, std::size_t n_inputs) {
    if (g.rows() < 1 || g.cols() < 1) {
        throw InvalidInput("conductance matrix must be non-empty");
    }
    if (static_cast<std::size_t>(g.rows()) != n_inputs) {
        std::ostringstream msg;
        msg << "input vector has " << n_inputs << " entries but the matrix has " << g.rows()
            << " rows";
        throw InvalidInput(msg.str());
    }
}

}  // namespace

IdealOutput ideal_voltage_mode(const Eigen::MatrixXd& g, std::span<const double> v_in) {
    check_shape(g, v_in.size());
    const Eigen::Map<const Eigen::VectorXd> v(v_in.data(), static_cast<Eigen::Index>(v_in.size()));
    return {g.transpose() * v};
}

IdealOutput ideal_current_mode(const Eigen::MatrixXd& g, std::span<const double> i_in) {
    check_shape(g, i_in.size());
    Eigen::VectorXd out = Eigen::VectorXd::Zero(g.cols());
    for (Eigen::Index i = 0; i < g.rows(); ++i) {
        const double row_sum = g.row(i).sum();
        if (!(row_sum > 0.0)) {
            std::ostringstream msg;
            msg << "row " << i << " has zero total conductance";
            throw InvalidInput(msg.str());
        }
        out += (i_in[static_cast<std::size_t>(i)] / row_sum) * g.row(i).transpose();
    }
    return {out};
}

Eigen::MatrixXd normalize_row_conductances(const Eigen::MatrixXd& g, double g_row_target,
                                           std::size_t free_column,
                                           const MemristorDevice& dev) {
    if (static_cast<Eigen::Index>(free_column) >= g.cols()) {
        throw InvalidInput("free column index outside the matrix");
    }
    if (!std::isfinite(g_row_target) || !(g_row_target > 0.0)) {
        throw InvalidInput("row conductance target must be finite and positive");
    }
    const auto fc = static_cast<Eigen::Index>(free_column);
    Eigen::MatrixXd out = g;
    for (Eigen::Index i = 0; i < g.rows(); ++i) {
        const double row_sum = g.row(i).sum();
        if (std::abs(row_sum - g_row_target) <= 1e-15 * g_row_target) {
            continue;
        }
        const double fixed = row_sum - g(i, fc);
        const double needed = g_row_target - fixed;
        if (!dev.admits(needed)) {
            std::ostringstream msg;
            msg.precision(17);
            msg << "row " << i << " needs free cell " << needed << " S to reach " << g_row_target
                << " S, outside [" << dev.g_off() << ", " << dev.g_on() << "] S";
            throw InfeasibleNormalization(msg.str(), static_cast<std::size_t>(i));
        }
        out(i, fc) = needed;
    }
    return out;
}

double dot_product_error(const Eigen::VectorXd& actual, const Eigen::VectorXd& ideal) {
    if (actual.size() != ideal.size() || ideal.size() == 0) {
        throw InvalidInput("dot_product_error needs two non-empty vectors of equal length");
    }
    const double denom = ideal.cwiseAbs().mean();
    if (!(denom > 0.0)) {
        throw InvalidInput("dot_product_error is undefined for an all-zero ideal output");
    }
    return (actual - ideal).cwiseAbs().mean() / denom;
}

}  // namespace xbarsim

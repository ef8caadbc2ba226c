#include "xbarsim/solver.hpp"

#include "xbarsim/error.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <sstream>

namespace xbarsim {

namespace {

using Complex = std::complex<double>;
using SparseMatrixC = Eigen::SparseMatrix<Complex>;

// Branch and source lists for the nodes whose current has to be recovered
// by KCL: shorted terminals and nodes held by ideal voltage sources.
class Probe {
public:
    explicit Probe(const NodalSystem& sys) : sys_(sys) {
        std::vector<char> wanted(sys.node_count, 0);
        for (const auto& t : sys.terminals) {
            if (t.conductance == 0.0) {
                wanted[t.node] = 1;
            }
        }
        for (const auto& s : sys.sources) {
            if (s.kind == SourceKind::IdealVoltage) {
                wanted[s.node] = 1;
            }
        }
        incident_.resize(sys.node_count);
        for (std::size_t k = 0; k < sys.branches.size(); ++k) {
            const auto& b = sys.branches[k];
            if (wanted[b.a]) {
                incident_[b.a].push_back(k);
            }
            if (b.b != kGround && wanted[b.b]) {
                incident_[b.b].push_back(k);
            }
        }
    }

    // Net current flowing into `node` through passive branches.
    template <typename Vec>
    typename Vec::Scalar inflow(NodeIndex node, const Vec& v) const {
        using T = typename Vec::Scalar;
        const T vn = v[static_cast<Eigen::Index>(node)];
        T sum(0.0);
        for (std::size_t k : incident_[node]) {
            const auto& b = sys_.branches[k];
            const NodeIndex other = b.a == node ? b.b : b.a;
            const T vo = other == kGround ? T(0.0) : v[static_cast<Eigen::Index>(other)];
            sum += b.conductance * (vo - vn);
        }
        return sum;
    }

    template <typename Vec>
    Vec terminal_currents(const Vec& v) const {
        using T = typename Vec::Scalar;
        Vec out(static_cast<Eigen::Index>(sys_.terminals.size()));
        for (std::size_t k = 0; k < sys_.terminals.size(); ++k) {
            const auto& t = sys_.terminals[k];
            const T vn = v[static_cast<Eigen::Index>(t.node)];
            if (t.conductance > 0.0) {
                out[static_cast<Eigen::Index>(k)] = t.conductance * vn;
                continue;
            }
            T sum = inflow(t.node, v);
            for (const auto& s : sys_.sources) {
                if (s.node != t.node) {
                    continue;
                }
                if (s.kind == SourceKind::Current) {
                    sum += s.value;
                } else if (s.kind == SourceKind::NortonVoltage) {
                    sum += s.conductance * (s.value - vn);
                }
            }
            out[static_cast<Eigen::Index>(k)] = sum;
        }
        return out;
    }

    double power(const Eigen::VectorXd& v) const {
        double p = 0.0;
        for (const auto& s : sys_.sources) {
            const double vn = v[static_cast<Eigen::Index>(s.node)];
            switch (s.kind) {
            case SourceKind::Current:
                p += vn * s.value;
                break;
            case SourceKind::NortonVoltage:
                p += s.value * s.conductance * (s.value - vn);
                break;
            case SourceKind::IdealVoltage:
                p += s.value * -inflow(s.node, v);
                break;
            }
        }
        return p;
    }

private:
    const NodalSystem& sys_;
    std::vector<std::vector<std::size_t>> incident_;
};

class Cholesky {
public:
    explicit Cholesky(const Eigen::SparseMatrix<double>& a) {
        ldlt_.compute(a);
        if (ldlt_.info() != Eigen::Success) {
            throw NumericalFailure("sparse LDL^T factorization failed");
        }
        const Eigen::VectorXd d = ldlt_.vectorD();
        const double scale = a.diagonal().cwiseAbs().maxCoeff();
        const auto pinv = ldlt_.permutationPinv();
        for (Eigen::Index k = 0; k < d.size(); ++k) {
            if (!(d[k] > 1e-13 * scale)) {
                const auto original = static_cast<std::size_t>(pinv.indices()[k]);
                std::ostringstream msg;
                msg << "nodal matrix is singular or indefinite (pivot " << d[k]
                    << " at unknown " << original << ")";
                throw NumericalFailure(msg.str(), original);
            }
        }
    }

    Eigen::VectorXd solve(const Eigen::VectorXd& b) const { return ldlt_.solve(b); }

private:
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt_;
};

Eigen::SparseMatrix<double> with_diagonal(const Eigen::SparseMatrix<double>& g,
                                          const Eigen::VectorXd& diag) {
    Eigen::SparseMatrix<double> d(g.rows(), g.cols());
    std::vector<Eigen::Triplet<double>> trip;
    for (Eigen::Index k = 0; k < diag.size(); ++k) {
        if (diag[k] != 0.0) {
            trip.emplace_back(k, k, diag[k]);
        }
    }
    d.setFromTriplets(trip.begin(), trip.end());
    Eigen::SparseMatrix<double> out = g + d;
    out.makeCompressed();
    return out;
}

void check_system(const NodalSystem& sys) {
    const auto m = static_cast<Eigen::Index>(sys.unknown_count());
    if (sys.G.rows() != m || sys.G.cols() != m || sys.src.size() != m || sys.C.size() != m) {
        throw InvalidInput("nodal system dimensions are inconsistent");
    }
}

}  // namespace

// ---------------------------------------------------------------------------
// DC
// ---------------------------------------------------------------------------

DcSolution solve_dc(const NodalSystem& sys) {
    check_system(sys);
    Eigen::VectorXd x = Eigen::VectorXd::Zero(sys.G.rows());
    double residual = 0.0;
    if (sys.unknown_count() > 0) {
        const Cholesky chol(sys.G);
        x = chol.solve(sys.src);
        const double target = 1e-10 * sys.src.norm();
        Eigen::VectorXd r = sys.src - sys.G * x;
        residual = r.norm();
        // A couple of refinement sweeps recover the last digits on badly
        // scaled systems (very small r_p next to very small g).
        for (int it = 0; it < 3 && residual > target; ++it) {
            x += chol.solve(r);
            r = sys.src - sys.G * x;
            residual = r.norm();
        }
        if (!x.allFinite()) {
            throw NumericalFailure("DC solution is not finite");
        }
    }
    DcSolution sol;
    sol.node_voltages = sys.expand(x);
    sol.column_currents = Probe(sys).terminal_currents(sol.node_voltages);
    sol.residual = residual;
    return sol;
}

// ---------------------------------------------------------------------------
// AC
// ---------------------------------------------------------------------------

AcSolution solve_ac(const NodalSystem& sys, double frequency_hz) {
    check_system(sys);
    if (!std::isfinite(frequency_hz) || frequency_hz < 0.0) {
        throw InvalidInput("AC frequency must be finite and >= 0");
    }
    const double omega = 2.0 * std::numbers::pi * frequency_hz;
    const auto m = sys.G.rows();
    Eigen::VectorXcd x = Eigen::VectorXcd::Zero(m);
    if (m > 0) {
        SparseMatrixC a = sys.G.cast<Complex>();
        std::vector<Eigen::Triplet<Complex>> trip;
        for (Eigen::Index k = 0; k < m; ++k) {
            if (sys.C[k] != 0.0) {
                trip.emplace_back(k, k, Complex(0.0, omega * sys.C[k]));
            }
        }
        SparseMatrixC jwc(m, m);
        jwc.setFromTriplets(trip.begin(), trip.end());
        a += jwc;
        a.makeCompressed();

        Eigen::SparseLU<SparseMatrixC> lu;
        lu.analyzePattern(a);
        lu.factorize(a);
        if (lu.info() != Eigen::Success) {
            throw NumericalFailure("sparse LU factorization of the AC system failed: " +
                                   lu.lastErrorMessage());
        }
        const Eigen::VectorXcd b = sys.src.cast<Complex>();
        x = lu.solve(b);
        Eigen::VectorXcd r = b - a * x;
        for (int it = 0; it < 3 && r.norm() > 1e-10 * b.norm(); ++it) {
            x += lu.solve(r);
            r = b - a * x;
        }
        if (!x.allFinite()) {
            throw NumericalFailure("AC solution is not finite");
        }
    }
    AcSolution sol;
    sol.frequency = frequency_hz;
    sol.node_phasors = sys.expand(x);
    sol.column_phasors = Probe(sys).terminal_currents(sol.node_phasors);
    return sol;
}

// ---------------------------------------------------------------------------
// Transient
// ---------------------------------------------------------------------------

double TransientResult::energy_until(double t) const {
    double e = impulse_energy;
    for (std::size_t k = 1; k < time.size(); ++k) {
        if (time[k - 1] >= t) {
            break;
        }
        const double t1 = std::min(time[k], t);
        const double h = t1 - time[k - 1];
        // Linear interpolation of p inside a partially covered interval.
        const double frac = h / (time[k] - time[k - 1]);
        const double p1 = source_power[k - 1] + frac * (source_power[k] - source_power[k - 1]);
        e += 0.5 * h * (source_power[k - 1] + p1);
    }
    return e;
}

double smallest_time_constant(const NodalSystem& sys) {
    check_system(sys);
    double tau = 0.0;
    for (Eigen::Index k = 0; k < sys.C.size(); ++k) {
        const double g = sys.G.coeff(k, k);
        if (sys.C[k] > 0.0 && g > 0.0) {
            const double t = sys.C[k] / g;
            tau = tau == 0.0 ? t : std::min(tau, t);
        }
    }
    return tau;
}

double dominant_time_constant(const NodalSystem& sys) {
    check_system(sys);
    if (sys.C.size() == 0 || sys.C.maxCoeff() <= 0.0) {
        return 0.0;
    }
    const Cholesky chol(sys.G);
    Eigen::VectorXd x = Eigen::VectorXd::Ones(sys.C.size());
    double lambda = 0.0;
    for (int it = 0; it < 500; ++it) {
        Eigen::VectorXd y = chol.solve(sys.C.cwiseProduct(x));
        const double norm = y.norm();
        if (norm == 0.0) {
            return 0.0;
        }
        const double next = norm / x.norm();
        x = y / norm;
        if (it > 0 && std::abs(next - lambda) <= 1e-9 * next) {
            return next;
        }
        lambda = next;
    }
    return lambda;
}

TransientResult solve_transient(const NodalSystem& sys, const TransientOptions& opts) {
    check_system(sys);
    if (!std::isfinite(opts.t_end) || !(opts.t_end > 0.0)) {
        throw InvalidInput("transient analysis requires t_end > 0");
    }
    double dt = opts.dt;
    if (dt == 0.0) {
        const double tau = smallest_time_constant(sys);
        dt = tau > 0.0 ? std::min(tau / 20.0, opts.t_end) : opts.t_end;
    }
    if (!std::isfinite(dt) || !(dt > 0.0)) {
        throw InvalidInput("transient analysis requires dt > 0");
    }
    if (dt > opts.t_end) {
        throw InvalidInput("transient time step exceeds t_end");
    }

    const auto m = sys.G.rows();
    const auto steps =
        static_cast<std::size_t>(std::ceil(opts.t_end / dt * (1.0 - 1e-12)));
    const Probe probe(sys);

    TransientResult out;
    out.dt = dt;
    for (const auto& s : sys.sources) {
        if (s.kind == SourceKind::IdealVoltage) {
            out.impulse_energy +=
                sys.node_capacitance[static_cast<Eigen::Index>(s.node)] * s.value * s.value;
        }
    }

    // Consistent start: capacitive unknowns at zero, the rest from KCL.
    Eigen::VectorXd x = Eigen::VectorXd::Zero(m);
    std::vector<Eigen::Index> algebraic;
    std::vector<Eigen::Index> position(static_cast<std::size_t>(m), -1);
    for (Eigen::Index k = 0; k < m; ++k) {
        if (sys.C[k] == 0.0) {
            position[static_cast<std::size_t>(k)] = static_cast<Eigen::Index>(algebraic.size());
            algebraic.push_back(k);
        }
    }
    if (!algebraic.empty()) {
        const auto na = static_cast<Eigen::Index>(algebraic.size());
        std::vector<Eigen::Triplet<double>> trip;
        for (Eigen::Index col = 0; col < sys.G.outerSize(); ++col) {
            for (Eigen::SparseMatrix<double>::InnerIterator it(sys.G, col); it; ++it) {
                const auto pr = position[static_cast<std::size_t>(it.row())];
                const auto pc = position[static_cast<std::size_t>(it.col())];
                if (pr >= 0 && pc >= 0) {
                    trip.emplace_back(pr, pc, it.value());
                }
            }
        }
        Eigen::SparseMatrix<double> gaa(na, na);
        gaa.setFromTriplets(trip.begin(), trip.end());
        Eigen::VectorXd rhs(na);
        for (Eigen::Index k = 0; k < na; ++k) {
            rhs[k] = sys.src[algebraic[static_cast<std::size_t>(k)]];
        }
        const Eigen::VectorXd xa = Cholesky(gaa).solve(rhs);
        for (Eigen::Index k = 0; k < na; ++k) {
            x[algebraic[static_cast<std::size_t>(k)]] = xa[k];
        }
    }

    double bound = 1.0;
    if (m > 0) {
        bound = std::max(bound, solve_dc(sys).node_voltages.cwiseAbs().maxCoeff());
    }
    bound *= 1e3;

    auto record = [&](double t, const Eigen::VectorXd& unknowns) {
        const Eigen::VectorXd v = sys.expand(unknowns);
        out.time.push_back(t);
        out.column_currents.push_back(probe.terminal_currents(v));
        out.source_power.push_back(probe.power(v));
        if (opts.record_node_voltages) {
            out.node_voltages.push_back(v);
        }
    };
    record(0.0, x);
    if (m == 0) {
        for (std::size_t k = 1; k <= steps; ++k) {
            record(static_cast<double>(k) * dt, x);
        }
        return out;
    }

    const std::size_t be_steps = std::min(opts.damping_steps, steps);
    std::optional<Cholesky> be;
    if (be_steps > 0) {
        be.emplace(with_diagonal(sys.G, sys.C / dt));
    }
    const Cholesky tr(with_diagonal(sys.G, 2.0 * sys.C / dt));

    for (std::size_t k = 1; k <= steps; ++k) {
        if (k <= be_steps) {
            x = be->solve(sys.src + sys.C.cwiseProduct(x) / dt);
        } else {
            const Eigen::VectorXd rhs =
                2.0 * sys.src + (2.0 / dt) * sys.C.cwiseProduct(x) - sys.G * x;
            x = tr.solve(rhs);
        }
        if (!x.allFinite() || x.cwiseAbs().maxCoeff() > bound) {
            std::ostringstream msg;
            msg << "transient step rejected at t = " << static_cast<double>(k) * dt
                << " s: solution diverged (ill-conditioned system)";
            throw NumericalFailure(msg.str());
        }
        record(static_cast<double>(k) * dt, x);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Dense oracle
// ---------------------------------------------------------------------------

DcSolution dense_oracle_solve(const NodalSystem& sys) {
    check_system(sys);
    if (sys.node_count > 1024) {
        throw InvalidInput("dense oracle is limited to 1024 nodes");
    }
    const auto m = sys.G.rows();
    Eigen::MatrixXd a = Eigen::MatrixXd(sys.G);
    Eigen::VectorXd b = sys.src;
    const double scale = m > 0 ? a.cwiseAbs().maxCoeff() : 0.0;

    // Row and column permutations; col_perm[k] is the unknown solved at step k.
    std::vector<Eigen::Index> col_perm(static_cast<std::size_t>(m));
    for (Eigen::Index k = 0; k < m; ++k) {
        col_perm[static_cast<std::size_t>(k)] = k;
    }
    for (Eigen::Index k = 0; k < m; ++k) {
        Eigen::Index pr = k;
        Eigen::Index pc = k;
        double best = 0.0;
        for (Eigen::Index c = k; c < m; ++c) {
            for (Eigen::Index r = k; r < m; ++r) {
                if (std::abs(a(r, c)) > best) {
                    best = std::abs(a(r, c));
                    pr = r;
                    pc = c;
                }
            }
        }
        if (!(best > 1e-13 * scale)) {
            const auto original = static_cast<std::size_t>(col_perm[static_cast<std::size_t>(k)]);
            std::ostringstream msg;
            msg << "dense oracle: matrix is singular (pivot " << best << " at step " << k << ")";
            throw NumericalFailure(msg.str(), original);
        }
        a.row(k).swap(a.row(pr));
        std::swap(b[k], b[pr]);
        a.col(k).swap(a.col(pc));
        std::swap(col_perm[static_cast<std::size_t>(k)], col_perm[static_cast<std::size_t>(pc)]);
        for (Eigen::Index r = k + 1; r < m; ++r) {
            const double f = a(r, k) / a(k, k);
            if (f == 0.0) {
                continue;
            }
            a.row(r).tail(m - k) -= f * a.row(k).tail(m - k);
            b[r] -= f * b[k];
        }
    }
    Eigen::VectorXd y(m);
    for (Eigen::Index k = m - 1; k >= 0; --k) {
        double s = b[k];
        for (Eigen::Index c = k + 1; c < m; ++c) {
            s -= a(k, c) * y[c];
        }
        y[k] = s / a(k, k);
    }
    Eigen::VectorXd x(m);
    for (Eigen::Index k = 0; k < m; ++k) {
        x[col_perm[static_cast<std::size_t>(k)]] = y[k];
    }

    DcSolution sol;
    sol.node_voltages = sys.expand(x);
    sol.column_currents = Probe(sys).terminal_currents(sol.node_voltages);
    sol.residual = m > 0 ? (sys.src - sys.G * x).norm() : 0.0;
    return sol;
}

// ---------------------------------------------------------------------------
// Observables
// ---------------------------------------------------------------------------

Eigen::VectorXd column_currents(const NodalSystem& sys, const Eigen::VectorXd& v) {
    return Probe(sys).terminal_currents(v);
}

Eigen::VectorXcd column_currents(const NodalSystem& sys, const Eigen::VectorXcd& v) {
    return Probe(sys).terminal_currents(v);
}

double source_power(const NodalSystem& sys, const Eigen::VectorXd& v) {
    return Probe(sys).power(v);
}

}  // namespace xbarsim

#include "xbarsim/network.hpp"

#include "xbarsim/error.hpp"

#include <cmath>
#include <sstream>

namespace xbarsim {

std::string_view to_string(DriveMode mode) noexcept {
    return mode == DriveMode::Voltage ? "voltage" : "current";
}

void Parasitics::validate() const {
    auto check = [](double v, const char* name) {
        if (!std::isfinite(v) || v < 0.0) {
            throw InvalidInput(std::string("parasitic ") + name + " must be finite and >= 0");
        }
    };
    check(r_p, "r_p");
    check(c_p, "c_p");
    check(r_t, "r_t");
}

void CrossbarConfig::validate() const {
    if (g.rows() < 1 || g.cols() < 1) {
        throw InvalidInput("crossbar must have at least one row and one column");
    }
    if (!g.allFinite() || (g.array() <= 0.0).any()) {
        throw InvalidInput("crossbar conductances must be finite and positive");
    }
    parasitics.validate();
    if (!std::isfinite(r_s) || r_s < 0.0) {
        throw InvalidInput("source resistance r_s must be finite and >= 0");
    }
}

void CrossbarConfig::validate(const MemristorDevice& dev) const {
    validate();
    for (Eigen::Index i = 0; i < g.rows(); ++i) {
        for (Eigen::Index j = 0; j < g.cols(); ++j) {
            if (!dev.admits(g(i, j))) {
                std::ostringstream msg;
                msg.precision(17);
                msg << "conductance g[" << i << "][" << j << "] = " << g(i, j)
                    << " S outside device range [" << dev.g_off() << ", " << dev.g_on() << "] S";
                throw OutOfRange(msg.str(), dev.g_off(), dev.g_on());
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Topology
// ---------------------------------------------------------------------------

std::size_t Topology::junction_index(Line line, std::size_t row, std::size_t col) const {
    if (row >= n_rows || col >= n_cols) {
        throw InvalidInput("junction position outside the array");
    }
    const std::size_t plane = line == Line::Row ? 0 : 1;
    return plane * n_rows * n_cols + row * n_cols + col;
}

JunctionLabel Topology::junction_label(std::size_t junction) const {
    const std::size_t per_plane = n_rows * n_cols;
    if (junction >= 2 * per_plane) {
        throw InvalidInput("junction index out of range");
    }
    const Line line = junction < per_plane ? Line::Row : Line::Column;
    const std::size_t k = junction % per_plane;
    return {line, k / n_cols, k % n_cols};
}

NodeIndex Topology::node_at(Line line, std::size_t row, std::size_t col) const {
    return junction_node[junction_index(line, row, col)];
}

std::size_t Topology::count(BranchKind kind) const noexcept {
    std::size_t n = 0;
    for (const auto& b : branches) {
        n += b.kind == kind ? 1 : 0;
    }
    return n;
}

Topology build_topology(const CrossbarConfig& cfg) {
    cfg.validate();
    const std::size_t rows = cfg.n_rows();
    const std::size_t cols = cfg.n_cols();
    const auto& par = cfg.parasitics;
    const bool ideal_wires = par.r_p == 0.0;

    Topology topo;
    topo.n_rows = rows;
    topo.n_cols = cols;
    topo.junction_node.resize(2 * rows * cols);
    topo.shorted_terminals = par.r_t == 0.0;

    // Row junctions first, then column junctions.
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < cols; ++j) {
            const std::size_t row_j = topo.junction_index(Line::Row, i, j);
            const std::size_t col_j = topo.junction_index(Line::Column, i, j);
            if (ideal_wires) {
                topo.junction_node[row_j] = i;
                topo.junction_node[col_j] = rows + j;
            } else {
                topo.junction_node[row_j] = row_j;
                topo.junction_node[col_j] = col_j;
            }
        }
    }
    topo.node_count = ideal_wires ? rows + cols : 2 * rows * cols;

    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < cols; ++j) {
            topo.branches.push_back({BranchKind::Memristor, topo.node_at(Line::Row, i, j),
                                     topo.node_at(Line::Column, i, j),
                                     cfg.g(static_cast<Eigen::Index>(i),
                                           static_cast<Eigen::Index>(j))});
        }
    }
    if (!ideal_wires) {
        const double g_wire = 1.0 / par.r_p;
        for (std::size_t i = 0; i < rows; ++i) {
            for (std::size_t j = 0; j + 1 < cols; ++j) {
                topo.branches.push_back({BranchKind::Wire, topo.node_at(Line::Row, i, j),
                                         topo.node_at(Line::Row, i, j + 1), g_wire});
            }
        }
        for (std::size_t j = 0; j < cols; ++j) {
            for (std::size_t i = 0; i + 1 < rows; ++i) {
                topo.branches.push_back({BranchKind::Wire, topo.node_at(Line::Column, i, j),
                                         topo.node_at(Line::Column, i + 1, j), g_wire});
            }
        }
    }

    for (std::size_t i = 0; i < rows; ++i) {
        topo.drive_nodes.push_back(topo.node_at(Line::Row, i, 0));
    }
    for (std::size_t j = 0; j < cols; ++j) {
        const NodeIndex t = topo.node_at(Line::Column, rows - 1, j);
        topo.terminal_nodes.push_back(t);
        if (!topo.shorted_terminals) {
            topo.branches.push_back({BranchKind::Terminal, t, kGround, 1.0 / par.r_t});
        }
    }

    for (std::size_t k = 0; k < topo.junction_node.size(); ++k) {
        topo.capacitors.push_back({topo.junction_node[k], par.c_p});
    }
    return topo;
}

NodalSystem assemble(const Topology& topo, const CrossbarConfig& cfg,
                     std::span<const double> drive) {
    if (drive.size() != topo.n_rows) {
        std::ostringstream msg;
        msg << "drive has " << drive.size() << " entries but the crossbar has " << topo.n_rows
            << " rows";
        throw InvalidInput(msg.str());
    }
    for (double d : drive) {
        if (!std::isfinite(d)) {
            throw InvalidInput("drive values must be finite");
        }
    }

    CircuitBuilder builder(topo.node_count);
    for (const auto& b : topo.branches) {
        if (b.kind != BranchKind::Terminal) {
            builder.add_conductance(b.a, b.b, b.conductance, b.kind);
        }
    }
    for (const auto& c : topo.capacitors) {
        builder.add_capacitor(c.node, c.farads);
    }
    for (std::size_t i = 0; i < topo.n_rows; ++i) {
        if (cfg.mode == DriveMode::Voltage) {
            builder.add_voltage_source(topo.drive_nodes[i], drive[i], cfg.r_s);
        } else {
            builder.add_current_source(topo.drive_nodes[i], drive[i]);
        }
    }
    for (NodeIndex t : topo.terminal_nodes) {
        builder.add_terminal(t, cfg.parasitics.r_t);
    }

    NodalSystem sys = builder.build();
    sys.junction_node = topo.junction_node;
    sys.n_rows = topo.n_rows;
    sys.n_cols = topo.n_cols;
    return sys;
}

// ---------------------------------------------------------------------------
// CircuitBuilder
// ---------------------------------------------------------------------------

CircuitBuilder::CircuitBuilder(std::size_t node_count)
    : node_count_(node_count),
      capacitance_(node_count, 0.0),
      pinned_(node_count, 0.0),
      is_pinned_(node_count, false) {}

NodeIndex CircuitBuilder::add_node() {
    capacitance_.push_back(0.0);
    pinned_.push_back(0.0);
    is_pinned_.push_back(false);
    return node_count_++;
}

void CircuitBuilder::check_node(NodeIndex node) const {
    if (node >= node_count_) {
        throw InvalidInput("node index out of range");
    }
}

void CircuitBuilder::pin(NodeIndex node, double volts) {
    if (is_pinned_[node] && pinned_[node] != volts) {
        std::ostringstream msg;
        msg << "node " << node << " pinned to two different voltages";
        throw InvalidInput(msg.str());
    }
    is_pinned_[node] = true;
    pinned_[node] = volts;
}

void CircuitBuilder::add_conductance(NodeIndex a, NodeIndex b, double siemens, BranchKind kind) {
    check_node(a);
    if (b != kGround) {
        check_node(b);
    }
    if (!std::isfinite(siemens) || siemens < 0.0) {
        throw InvalidInput("conductance must be finite and >= 0");
    }
    if (a == b) {
        return;
    }
    branches_.push_back({kind, a, b, siemens});
}

void CircuitBuilder::add_capacitor(NodeIndex node, double farads) {
    check_node(node);
    if (!std::isfinite(farads) || farads < 0.0) {
        throw InvalidInput("capacitance must be finite and >= 0");
    }
    capacitance_[node] += farads;
}

void CircuitBuilder::add_current_source(NodeIndex node, double amperes) {
    check_node(node);
    sources_.push_back({SourceKind::Current, node, amperes, 0.0});
}

void CircuitBuilder::add_voltage_source(NodeIndex node, double volts, double r_s) {
    check_node(node);
    if (!std::isfinite(r_s) || r_s < 0.0) {
        throw InvalidInput("source resistance must be finite and >= 0");
    }
    if (r_s == 0.0) {
        pin(node, volts);
        sources_.push_back({SourceKind::IdealVoltage, node, volts, 0.0});
    } else {
        sources_.push_back({SourceKind::NortonVoltage, node, volts, 1.0 / r_s});
    }
}

void CircuitBuilder::add_terminal(NodeIndex node, double r_t) {
    check_node(node);
    if (!std::isfinite(r_t) || r_t < 0.0) {
        throw InvalidInput("terminal resistance must be finite and >= 0");
    }
    if (r_t == 0.0) {
        pin(node, 0.0);
        terminals_.push_back({node, 0.0});
    } else {
        branches_.push_back({BranchKind::Terminal, node, kGround, 1.0 / r_t});
        terminals_.push_back({node, 1.0 / r_t});
    }
}

NodalSystem CircuitBuilder::build() const {
    NodalSystem sys;
    sys.node_count = node_count_;
    sys.unknown_of.assign(node_count_, -1);
    sys.fixed_voltage = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(node_count_));
    sys.node_capacitance = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(node_count_));
    for (NodeIndex n = 0; n < node_count_; ++n) {
        sys.node_capacitance[static_cast<Eigen::Index>(n)] = capacitance_[n];
        if (is_pinned_[n]) {
            sys.fixed_voltage[static_cast<Eigen::Index>(n)] = pinned_[n];
        } else {
            sys.unknown_of[n] = static_cast<std::ptrdiff_t>(sys.node_of_unknown.size());
            sys.node_of_unknown.push_back(n);
        }
    }

    const auto m = static_cast<Eigen::Index>(sys.node_of_unknown.size());
    sys.C.resize(m);
    for (Eigen::Index u = 0; u < m; ++u) {
        sys.C[u] = capacitance_[sys.node_of_unknown[static_cast<std::size_t>(u)]];
    }
    sys.src = Eigen::VectorXd::Zero(m);

    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(4 * branches_.size() + sources_.size());
    auto unknown = [&](NodeIndex n) -> std::ptrdiff_t {
        return n == kGround ? -1 : sys.unknown_of[n];
    };
    auto voltage_of_fixed = [&](NodeIndex n) {
        return n == kGround ? 0.0 : pinned_[n];
    };

    for (const auto& b : branches_) {
        const auto ua = unknown(b.a);
        const auto ub = unknown(b.b);
        if (ua >= 0) {
            trip.emplace_back(ua, ua, b.conductance);
        }
        if (ub >= 0) {
            trip.emplace_back(ub, ub, b.conductance);
        }
        if (ua >= 0 && ub >= 0) {
            trip.emplace_back(ua, ub, -b.conductance);
            trip.emplace_back(ub, ua, -b.conductance);
        } else if (ua >= 0) {
            sys.src[ua] += b.conductance * voltage_of_fixed(b.b);
        } else if (ub >= 0) {
            sys.src[ub] += b.conductance * voltage_of_fixed(b.a);
        }
    }
    for (const auto& s : sources_) {
        const auto u = unknown(s.node);
        if (u < 0) {
            continue;
        }
        if (s.kind == SourceKind::Current) {
            sys.src[u] += s.value;
        } else if (s.kind == SourceKind::NortonVoltage) {
            trip.emplace_back(u, u, s.conductance);
            sys.src[u] += s.conductance * s.value;
        }
    }

    sys.G.resize(m, m);
    sys.G.setFromTriplets(trip.begin(), trip.end());
    sys.G.makeCompressed();
    sys.branches = branches_;
    sys.sources = sources_;
    sys.terminals = terminals_;
    return sys;
}

// ---------------------------------------------------------------------------
// NodalSystem
// ---------------------------------------------------------------------------

std::vector<NodeIndex> NodalSystem::output_nodes() const {
    std::vector<NodeIndex> out;
    out.reserve(terminals.size());
    for (const auto& t : terminals) {
        out.push_back(t.node);
    }
    return out;
}

namespace {

template <typename Vec>
Vec expand_impl(const NodalSystem& sys, const Vec& unknowns) {
    if (unknowns.size() != static_cast<Eigen::Index>(sys.unknown_count())) {
        throw InvalidInput("unknown vector size does not match the nodal system");
    }
    Vec full(static_cast<Eigen::Index>(sys.node_count));
    for (NodeIndex n = 0; n < sys.node_count; ++n) {
        const auto u = sys.unknown_of[n];
        full[static_cast<Eigen::Index>(n)] =
            u >= 0 ? unknowns[u] : typename Vec::Scalar(sys.fixed_voltage[static_cast<Eigen::Index>(n)]);
    }
    return full;
}

}  // namespace

Eigen::VectorXd NodalSystem::expand(const Eigen::VectorXd& unknowns) const {
    return expand_impl(*this, unknowns);
}

Eigen::VectorXcd NodalSystem::expand(const Eigen::VectorXcd& unknowns) const {
    return expand_impl(*this, unknowns);
}

}  // namespace xbarsim

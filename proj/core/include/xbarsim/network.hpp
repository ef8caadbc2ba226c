#pragma once

#include "xbarsim/device.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <cstddef>
#include <limits>
#include <span>
#include <string_view>
#include <vector>

namespace xbarsim {

using NodeIndex = std::size_t;
inline constexpr NodeIndex kGround = std::numeric_limits<NodeIndex>::max();

enum class DriveMode { Voltage, Current };

std::string_view to_string(DriveMode mode) noexcept;

// Wire and sensing parasitics, all in SI units.
struct Parasitics {
    double r_p = 0.0;  // ohms per wire segment between adjacent junctions
    double c_p = 0.0;  // farads from every junction node to ground
    double r_t = 0.0;  // ohms from each column terminal to ground

    void validate() const;
};

struct CrossbarConfig {
    Eigen::MatrixXd g;  // n_rows x n_cols, siemens
    Parasitics parasitics;
    DriveMode mode = DriveMode::Voltage;
    // Series resistance of each voltage drive. Zero gives an ideal source
    // whose node is eliminated from the unknowns.
    double r_s = 0.0;

    std::size_t n_rows() const noexcept { return static_cast<std::size_t>(g.rows()); }
    std::size_t n_cols() const noexcept { return static_cast<std::size_t>(g.cols()); }

    // Shape, finiteness and parasitic checks that need no device.
    void validate() const;
    // Additionally requires every g[i][j] to lie in [g_off, g_on].
    void validate(const MemristorDevice& dev) const;
};

enum class Line { Row, Column };

struct JunctionLabel {
    Line line;
    std::size_t row;
    std::size_t col;

    bool operator==(const JunctionLabel&) const = default;
};

enum class BranchKind { Memristor, Wire, Terminal, Generic };

// Passive resistive element; b may be kGround.
struct Branch {
    BranchKind kind;
    NodeIndex a;
    NodeIndex b;
    double conductance;
};

struct Capacitor {
    NodeIndex node;
    double farads;
};

// Graph-only view of a crossbar. Ideal wires (r_p == 0) collapse every
// junction of a line onto one electrical node.
struct Topology {
    std::size_t n_rows = 0;
    std::size_t n_cols = 0;
    std::size_t node_count = 0;            // electrical nodes after merging
    std::vector<NodeIndex> junction_node;  // junction index -> electrical node
    std::vector<Branch> branches;          // memristors, wire segments, terminals
    std::vector<Capacitor> capacitors;     // one per junction
    std::vector<NodeIndex> drive_nodes;    // left end of each row line
    std::vector<NodeIndex> terminal_nodes; // bottom end of each column line
    bool shorted_terminals = false;        // r_t == 0

    std::size_t junction_count() const noexcept { return junction_node.size(); }
    std::size_t junction_index(Line line, std::size_t row, std::size_t col) const;
    JunctionLabel junction_label(std::size_t junction) const;
    NodeIndex node_at(Line line, std::size_t row, std::size_t col) const;
    std::size_t count(BranchKind kind) const noexcept;
};

enum class SourceKind { IdealVoltage, NortonVoltage, Current };

struct Source {
    SourceKind kind;
    NodeIndex node;
    double value;        // volts or amperes
    double conductance;  // 1/r_s for NortonVoltage, unused otherwise
};

// Column sensing point. A zero conductance marks a short to ground.
struct Terminal {
    NodeIndex node;
    double conductance;
};

// Nodal equations G v = src over the free (non-fixed) nodes, plus everything
// needed to recover branch currents and source power afterwards.
struct NodalSystem {
    std::size_t node_count = 0;                // electrical nodes, free and fixed
    std::vector<std::ptrdiff_t> unknown_of;    // node -> unknown index, -1 if fixed
    std::vector<NodeIndex> node_of_unknown;
    Eigen::VectorXd fixed_voltage;             // per node; zero for free nodes
    Eigen::VectorXd node_capacitance;          // per node
    Eigen::SparseMatrix<double> G;             // unknowns x unknowns, symmetric
    Eigen::VectorXd C;                         // diagonal capacitance per unknown
    Eigen::VectorXd src;                       // per unknown, amperes
    std::vector<Branch> branches;
    std::vector<Source> sources;
    std::vector<Terminal> terminals;
    std::vector<NodeIndex> junction_node;      // copied from the topology, may be empty
    std::size_t n_rows = 0;
    std::size_t n_cols = 0;

    std::size_t unknown_count() const noexcept { return node_of_unknown.size(); }
    bool is_fixed(NodeIndex node) const { return unknown_of.at(node) < 0; }
    std::vector<NodeIndex> output_nodes() const;
    // Full per-node voltage vector from the unknowns.
    Eigen::VectorXd expand(const Eigen::VectorXd& unknowns) const;
    Eigen::VectorXcd expand(const Eigen::VectorXcd& unknowns) const;
};

// Netlist-level stamping of conductances, capacitors and sources to ground.
// Used for the crossbar itself and for small hand-built test circuits.
class CircuitBuilder {
public:
    explicit CircuitBuilder(std::size_t node_count);

    NodeIndex add_node();
    std::size_t node_count() const noexcept { return node_count_; }

    void add_conductance(NodeIndex a, NodeIndex b, double siemens,
                         BranchKind kind = BranchKind::Generic);
    void add_capacitor(NodeIndex node, double farads);
    void add_current_source(NodeIndex node, double amperes);
    // r_s == 0 pins the node to `volts`; otherwise a Norton equivalent.
    void add_voltage_source(NodeIndex node, double volts, double r_s);
    // r_t == 0 pins the node to ground and senses the short-circuit current.
    void add_terminal(NodeIndex node, double r_t);

    NodalSystem build() const;

private:
    void check_node(NodeIndex node) const;
    void pin(NodeIndex node, double volts);

    std::size_t node_count_;
    std::vector<Branch> branches_;
    std::vector<double> capacitance_;
    std::vector<Source> sources_;
    std::vector<Terminal> terminals_;
    std::vector<double> pinned_;
    std::vector<bool> is_pinned_;
};

Topology build_topology(const CrossbarConfig& cfg);

// Stamps the topology under `drive` (volts per row in voltage mode, amperes
// per row in current mode).
NodalSystem assemble(const Topology& topo, const CrossbarConfig& cfg,
                     std::span<const double> drive);

inline NodalSystem assemble(const CrossbarConfig& cfg, std::span<const double> drive) {
    return assemble(build_topology(cfg), cfg, drive);
}

}  // namespace xbarsim

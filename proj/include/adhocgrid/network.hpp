#pragma once

// Network topology and the global design parameters of an ad hoc DC
// microgrid: perfectly regulated sources, constant-power loads with input
// capacitors, and RL lines.

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace adhocgrid {

using NodeId = std::size_t;
using LineId = std::size_t;

enum class NodeKind { Source, Load };

struct Node {
    NodeKind kind = NodeKind::Source;
    double p_nominal = 0.0;    // W
    double p_max = 0.0;        // W, per-load bound p_k^max
    double capacitance = 0.0;  // F

    static Node source() { return Node{}; }
    static Node load(double p_nominal, double p_max, double capacitance) {
        return Node{NodeKind::Load, p_nominal, p_max, capacitance};
    }

    bool is_load() const noexcept { return kind == NodeKind::Load; }
    bool operator==(const Node&) const = default;
};

struct Line {
    NodeId from = 0;
    NodeId to = 0;
    double resistance = 0.0;  // ohm
    double inductance = 0.0;  // H

    double time_constant() const noexcept { return inductance / resistance; }
    bool operator==(const Line&) const = default;
};

/// Topology-independent design envelope shared by every unit of the grid.
struct GridParameters {
    double v0 = 1.0;       // source setpoint
    double r_max = 1.0;    // aggregate line resistance budget
    double tau_max = 1.0;  // strict bound on line time constants
    double p_max = 0.0;    // system loadability bound
    double v_min = 0.75;   // lowest acceptable equilibrium voltage
    double v_tr = 0.66;    // lowest acceptable transient voltage

    /// Apex of the nose curve of the equivalent two-bus network.
    double p0() const noexcept { return v0 * v0 / (4.0 * r_max); }
    /// Capacitance unit used to normalize the design curves.
    double c0() const noexcept { return tau_max / r_max; }

    bool operator==(const GridParameters&) const = default;
};

/// Immutable graph of sources, loads and lines. Node ids are dense indices
/// into `nodes()`; sources and loads share the index space.
class NetworkSpec {
public:
    NetworkSpec(GridParameters params, std::vector<Node> nodes, std::vector<Line> lines);

    const GridParameters& params() const noexcept { return params_; }
    const std::vector<Node>& nodes() const noexcept { return nodes_; }
    const std::vector<Line>& lines() const noexcept { return lines_; }

    std::size_t num_nodes() const noexcept { return nodes_.size(); }
    std::size_t num_lines() const noexcept { return lines_.size(); }
    std::size_t num_loads() const noexcept { return loads_.size(); }

    const Node& node(NodeId id) const { return nodes_.at(id); }
    const Line& line(LineId id) const { return lines_.at(id); }

    /// Load node ids in ascending order; position in this list is the load
    /// index used by every load-space vector (powers, load voltages).
    const std::vector<NodeId>& load_nodes() const noexcept { return loads_; }
    const std::vector<NodeId>& source_nodes() const noexcept { return sources_; }

    /// Position of a node in `load_nodes()`, or nullopt for sources.
    std::optional<std::size_t> load_index(NodeId id) const;

    /// Nominal powers, one entry per load.
    Eigen::VectorXd nominal_powers() const;
    Eigen::VectorXd max_powers() const;
    Eigen::VectorXd capacitances() const;

    /// Full node-voltage vector with sources pinned at V0.
    Eigen::VectorXd expand_voltages(const Eigen::VectorXd& v_loads) const;
    Eigen::VectorXd restrict_to_loads(const Eigen::VectorXd& v_full) const;

    double total_resistance() const;
    double max_time_constant() const;
    double min_time_constant() const;
    double min_resistance() const;

    bool operator==(const NetworkSpec& other) const {
        return params_ == other.params_ && nodes_ == other.nodes_ && lines_ == other.lines_;
    }

private:
    GridParameters params_;
    std::vector<Node> nodes_;
    std::vector<Line> lines_;
    std::vector<NodeId> loads_;
    std::vector<NodeId> sources_;
    std::vector<std::ptrdiff_t> load_slot_;
};

/// Transposed incidence matrix: row per line, +1 at `from`, -1 at `to`.
Eigen::MatrixXd incidence_matrix(const NetworkSpec& spec);

/// Columns of the incidence matrix that belong to load nodes.
Eigen::MatrixXd load_incidence(const NetworkSpec& spec);

enum class ViolationKind {
    InvalidGlobalParameter,
    VoltageLevelsInconsistent,
    LoadabilityExceedsP0,
    NoSource,
    NotStronglyConnected,
    EndpointOutOfRange,
    SelfLoop,
    NonPositiveResistance,
    NonPositiveInductance,
    TimeConstantTooLarge,
    ResistanceBudgetExceeded,
    LoadPowerOutOfRange,
    NonPositiveCapacitance,
    NominalLoadExceedsPmax,
    SourceToSourceLine,
};

enum class Severity { Error, Info };

struct Violation {
    ViolationKind kind;
    Severity severity = Severity::Error;
    std::optional<std::size_t> element;  // node or line id, when applicable
    std::string message;
};

std::string to_string(ViolationKind kind);

/// Checks every assumption the certificates rely on. Informational entries
/// (source-to-source lines) do not make a spec invalid.
std::vector<Violation> validate(const NetworkSpec& spec);

bool has_errors(const std::vector<Violation>& violations);

/// Raised by operations that require a spec free of error-level violations.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(std::vector<Violation> violations);
    const std::vector<Violation>& violations() const noexcept { return violations_; }

private:
    std::vector<Violation> violations_;
};

}  // namespace adhocgrid

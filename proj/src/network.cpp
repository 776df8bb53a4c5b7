#include "adhocgrid/network.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace adhocgrid {

NetworkSpec::NetworkSpec(GridParameters params, std::vector<Node> nodes, std::vector<Line> lines)
    : params_(params), nodes_(std::move(nodes)), lines_(std::move(lines)) {
    load_slot_.assign(nodes_.size(), -1);
    for (NodeId k = 0; k < nodes_.size(); ++k) {
        if (nodes_[k].is_load()) {
            load_slot_[k] = static_cast<std::ptrdiff_t>(loads_.size());
            loads_.push_back(k);
        } else {
            sources_.push_back(k);
        }
    }
}

std::optional<std::size_t> NetworkSpec::load_index(NodeId id) const {
    if (id >= load_slot_.size() || load_slot_[id] < 0) return std::nullopt;
    return static_cast<std::size_t>(load_slot_[id]);
}

Eigen::VectorXd NetworkSpec::nominal_powers() const {
    Eigen::VectorXd p(loads_.size());
    for (std::size_t j = 0; j < loads_.size(); ++j) p[j] = nodes_[loads_[j]].p_nominal;
    return p;
}

Eigen::VectorXd NetworkSpec::max_powers() const {
    Eigen::VectorXd p(loads_.size());
    for (std::size_t j = 0; j < loads_.size(); ++j) p[j] = nodes_[loads_[j]].p_max;
    return p;
}

Eigen::VectorXd NetworkSpec::capacitances() const {
    Eigen::VectorXd c(loads_.size());
    for (std::size_t j = 0; j < loads_.size(); ++j) c[j] = nodes_[loads_[j]].capacitance;
    return c;
}

Eigen::VectorXd NetworkSpec::expand_voltages(const Eigen::VectorXd& v_loads) const {
    Eigen::VectorXd v = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(nodes_.size()), params_.v0);
    for (std::size_t j = 0; j < loads_.size(); ++j) v[static_cast<Eigen::Index>(loads_[j])] = v_loads[j];
    return v;
}

Eigen::VectorXd NetworkSpec::restrict_to_loads(const Eigen::VectorXd& v_full) const {
    Eigen::VectorXd v(loads_.size());
    for (std::size_t j = 0; j < loads_.size(); ++j) v[j] = v_full[static_cast<Eigen::Index>(loads_[j])];
    return v;
}

double NetworkSpec::total_resistance() const {
    return std::accumulate(lines_.begin(), lines_.end(), 0.0,
                           [](double acc, const Line& l) { return acc + l.resistance; });
}

double NetworkSpec::max_time_constant() const {
    double tau = 0.0;
    for (const auto& l : lines_) tau = std::max(tau, l.time_constant());
    return tau;
}

double NetworkSpec::min_time_constant() const {
    double tau = std::numeric_limits<double>::infinity();
    for (const auto& l : lines_) tau = std::min(tau, l.time_constant());
    return tau;
}

double NetworkSpec::min_resistance() const {
    double r = std::numeric_limits<double>::infinity();
    for (const auto& l : lines_) r = std::min(r, l.resistance);
    return r;
}

Eigen::MatrixXd incidence_matrix(const NetworkSpec& spec) {
    Eigen::MatrixXd nabla = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(spec.num_lines()),
                                                  static_cast<Eigen::Index>(spec.num_nodes()));
    for (LineId a = 0; a < spec.num_lines(); ++a) {
        const auto& l = spec.line(a);
        nabla(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(l.from)) += 1.0;
        nabla(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(l.to)) -= 1.0;
    }
    return nabla;
}

Eigen::MatrixXd load_incidence(const NetworkSpec& spec) {
    const Eigen::MatrixXd full = incidence_matrix(spec);
    Eigen::MatrixXd nabla(full.rows(), static_cast<Eigen::Index>(spec.num_loads()));
    for (std::size_t j = 0; j < spec.num_loads(); ++j)
        nabla.col(static_cast<Eigen::Index>(j)) = full.col(static_cast<Eigen::Index>(spec.load_nodes()[j]));
    return nabla;
}

std::string to_string(ViolationKind kind) {
    switch (kind) {
        case ViolationKind::InvalidGlobalParameter: return "InvalidGlobalParameter";
        case ViolationKind::VoltageLevelsInconsistent: return "VoltageLevelsInconsistent";
        case ViolationKind::LoadabilityExceedsP0: return "LoadabilityExceedsP0";
        case ViolationKind::NoSource: return "NoSource";
        case ViolationKind::NotStronglyConnected: return "NotStronglyConnected";
        case ViolationKind::EndpointOutOfRange: return "EndpointOutOfRange";
        case ViolationKind::SelfLoop: return "SelfLoop";
        case ViolationKind::NonPositiveResistance: return "NonPositiveResistance";
        case ViolationKind::NonPositiveInductance: return "NonPositiveInductance";
        case ViolationKind::TimeConstantTooLarge: return "TimeConstantTooLarge";
        case ViolationKind::ResistanceBudgetExceeded: return "ResistanceBudgetExceeded";
        case ViolationKind::LoadPowerOutOfRange: return "LoadPowerOutOfRange";
        case ViolationKind::NonPositiveCapacitance: return "NonPositiveCapacitance";
        case ViolationKind::NominalLoadExceedsPmax: return "NominalLoadExceedsPmax";
        case ViolationKind::SourceToSourceLine: return "SourceToSourceLine";
    }
    return "Unknown";
}

namespace {

template <typename... Args>
std::string concat(const Args&... args) {
    std::ostringstream os;
    os.precision(12);
    (os << ... << args);
    return os.str();
}

struct DisjointSets {
    std::vector<std::size_t> parent;
    explicit DisjointSets(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    std::size_t find(std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    }
    void unite(std::size_t a, std::size_t b) { parent[find(a)] = find(b); }
};

void check_globals(const GridParameters& g, std::vector<Violation>& out) {
    auto positive = [&](double value, const char* name) {
        if (!(value > 0.0) || !std::isfinite(value))
            out.push_back({ViolationKind::InvalidGlobalParameter, Severity::Error, std::nullopt,
                           concat(name, " must be positive and finite (got ", value, ")")});
    };
    positive(g.v0, "v0");
    positive(g.r_max, "r_max");
    positive(g.tau_max, "tau_max");
    if (!(g.p_max >= 0.0) || !std::isfinite(g.p_max))
        out.push_back({ViolationKind::InvalidGlobalParameter, Severity::Error, std::nullopt,
                       concat("p_max must be nonnegative and finite (got ", g.p_max, ")")});

    if (!(g.v0 / 2.0 < g.v_tr && g.v_tr <= g.v_min && g.v_min < g.v0))
        out.push_back({ViolationKind::VoltageLevelsInconsistent, Severity::Error, std::nullopt,
                       concat("require v0/2 < v_tr <= v_min < v0 (v0=", g.v0, ", v_tr=", g.v_tr,
                              ", v_min=", g.v_min, ")")});

    if (g.v0 > 0.0 && g.r_max > 0.0 && !(g.p_max < g.p0()))
        out.push_back({ViolationKind::LoadabilityExceedsP0, Severity::Error, std::nullopt,
                       concat("p_max=", g.p_max, " must stay below P0=v0^2/(4 r_max)=", g.p0())});
}

}  // namespace

std::vector<Violation> validate(const NetworkSpec& spec) {
    std::vector<Violation> out;
    const auto& g = spec.params();
    check_globals(g, out);

    const std::size_t n = spec.num_nodes();
    if (spec.source_nodes().empty())
        out.push_back({ViolationKind::NoSource, Severity::Error, std::nullopt, "network has no source"});

    double nominal_total = 0.0;
    for (NodeId k = 0; k < n; ++k) {
        const auto& node = spec.node(k);
        if (!node.is_load()) continue;
        nominal_total += node.p_nominal;
        if (!(node.p_nominal >= 0.0 && node.p_nominal <= node.p_max && node.p_max <= g.p_max))
            out.push_back({ViolationKind::LoadPowerOutOfRange, Severity::Error, k,
                           concat("load ", k, ": require 0 <= p_nominal <= p_max_k <= p_max (p_nominal=",
                                  node.p_nominal, ", p_max_k=", node.p_max, ", p_max=", g.p_max, ")")});
        if (!(node.capacitance > 0.0))
            out.push_back({ViolationKind::NonPositiveCapacitance, Severity::Error, k,
                           concat("load ", k, ": capacitance must be positive")});
    }
    if (nominal_total > g.p_max)
        out.push_back({ViolationKind::NominalLoadExceedsPmax, Severity::Error, std::nullopt,
                       concat("sum of nominal loads ", nominal_total, " exceeds p_max=", g.p_max)});

    DisjointSets sets(n);
    for (LineId a = 0; a < spec.num_lines(); ++a) {
        const auto& l = spec.line(a);
        if (l.from >= n || l.to >= n) {
            out.push_back({ViolationKind::EndpointOutOfRange, Severity::Error, a,
                           concat("line ", a, " references a node outside [0, ", n, ")")});
            continue;
        }
        if (l.from == l.to) {
            out.push_back({ViolationKind::SelfLoop, Severity::Error, a, concat("line ", a, " is a self-loop")});
            continue;
        }
        sets.unite(l.from, l.to);
        if (!spec.node(l.from).is_load() && !spec.node(l.to).is_load())
            out.push_back({ViolationKind::SourceToSourceLine, Severity::Info, a,
                           concat("line ", a, " connects two sources")});
    }

    for (LineId a = 0; a < spec.num_lines(); ++a) {
        const auto& l = spec.line(a);
        if (!(l.resistance > 0.0))
            out.push_back({ViolationKind::NonPositiveResistance, Severity::Error, a,
                           concat("line ", a, ": resistance must be positive")});
        if (!(l.inductance > 0.0))
            out.push_back({ViolationKind::NonPositiveInductance, Severity::Error, a,
                           concat("line ", a, ": inductance must be positive")});
        if (l.resistance > 0.0 && l.inductance > 0.0 && !(l.time_constant() < g.tau_max))
            out.push_back({ViolationKind::TimeConstantTooLarge, Severity::Error, a,
                           concat("line ", a, ": time constant ", l.time_constant(), " must be below tau_max=",
                                  g.tau_max)});
    }
    if (spec.total_resistance() > g.r_max)
        out.push_back({ViolationKind::ResistanceBudgetExceeded, Severity::Error, std::nullopt,
                       concat("total line resistance ", spec.total_resistance(), " exceeds r_max=", g.r_max)});

    // The energized component is the largest one holding a source.
    if (!spec.source_nodes().empty()) {
        std::vector<std::size_t> size(n, 0);
        for (NodeId k = 0; k < n; ++k) ++size[sets.find(k)];
        std::size_t main = sets.find(spec.source_nodes().front());
        for (NodeId s : spec.source_nodes())
            if (size[sets.find(s)] > size[main]) main = sets.find(s);
        for (NodeId k = 0; k < n; ++k)
            if (sets.find(k) != main)
                out.push_back({ViolationKind::NotStronglyConnected, Severity::Error, k,
                               concat("node ", k, " is not connected to the energized component")});
    }
    return out;
}

bool has_errors(const std::vector<Violation>& violations) {
    return std::any_of(violations.begin(), violations.end(),
                       [](const Violation& v) { return v.severity == Severity::Error; });
}

namespace {

std::string summarize(const std::vector<Violation>& violations) {
    std::string text = "network spec is invalid:";
    for (const auto& v : violations)
        if (v.severity == Severity::Error) text += "\n  " + to_string(v.kind) + ": " + v.message;
    return text;
}

}  // namespace

ValidationError::ValidationError(std::vector<Violation> violations)
    : std::runtime_error(summarize(violations)), violations_(std::move(violations)) {}

}  // namespace adhocgrid

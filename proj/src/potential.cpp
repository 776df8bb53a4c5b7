#include "adhocgrid/potential.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "adhocgrid/errors.hpp"

namespace adhocgrid {

double co_content(const NetworkSpec& spec, const Eigen::VectorXd& v_full, const Eigen::VectorXd& p) {
    double g = 0.0;
    for (const auto& l : spec.lines()) {
        const double d = v_full[static_cast<Eigen::Index>(l.from)] - v_full[static_cast<Eigen::Index>(l.to)];
        g += d * d / (2.0 * l.resistance);
    }
    for (std::size_t j = 0; j < spec.num_loads(); ++j) {
        const double v = v_full[static_cast<Eigen::Index>(spec.load_nodes()[j])];
        if (!(v > 0.0)) throw DomainError("co-content requires positive load voltages");
        g += p[static_cast<Eigen::Index>(j)] * std::log(v);
    }
    return g;
}

double co_content_losses_form(const NetworkSpec& spec, const EquilibriumResult& eq, const Eigen::VectorXd& p) {
    const Eigen::VectorXd residual = power_flow_residual(spec, eq.v_sep, p);
    const double tol = power_flow_tolerance(spec);
    if (residual.size() > 0 && !(residual.lpNorm<Eigen::Infinity>() < tol))
        throw NotAtEquilibrium("power-flow residual " + std::to_string(residual.lpNorm<Eigen::Infinity>()) +
                               " exceeds tolerance " + std::to_string(tol));
    const double v0 = spec.params().v0;
    double g = 0.0;
    for (std::size_t j = 0; j < spec.num_loads(); ++j) {
        const double v = eq.v_sep[static_cast<Eigen::Index>(spec.load_nodes()[j])];
        const double pj = p[static_cast<Eigen::Index>(j)];
        g += pj / v * (v0 - v) / 2.0 + pj * std::log(v);
    }
    return g;
}

BraytonMoser::BraytonMoser(const NetworkSpec& spec, const Eigen::VectorXd& p)
    : v0_(spec.params().v0),
      tau_max_(spec.params().tau_max),
      lines_(spec.num_lines()),
      loads_(spec.num_loads()),
      p_(p) {
    auto slot = [&](NodeId id) -> std::ptrdiff_t {
        const auto j = spec.load_index(id);
        return j ? static_cast<std::ptrdiff_t>(*j) : -1;
    };
    for (const auto& l : spec.lines()) {
        from_slot_.push_back(slot(l.from));
        to_slot_.push_back(slot(l.to));
        resistance_.push_back(l.resistance);
        line_weight_.push_back((tau_max_ - l.time_constant()) * l.inductance);
        line_damping_.push_back(tau_max_ * l.resistance - l.inductance);
    }
    for (NodeId k : spec.load_nodes()) capacitance_.push_back(spec.node(k).capacitance);
}

double BraytonMoser::co_content(std::span<const double> x) const {
    const double* v = x.data() + lines_;
    double g = 0.0;
    for (std::size_t a = 0; a < lines_; ++a) {
        const double d = (from_slot_[a] < 0 ? v0_ : v[from_slot_[a]]) - (to_slot_[a] < 0 ? v0_ : v[to_slot_[a]]);
        g += d * d / (2.0 * resistance_[a]);
    }
    for (std::size_t k = 0; k < loads_; ++k) {
        if (!(v[k] > 0.0)) throw DomainError("co-content requires positive load voltages");
        g += p_[static_cast<Eigen::Index>(k)] * std::log(v[k]);
    }
    return g;
}

bool BraytonMoser::q_definite(std::span<const double> x) const {
    const double* v = x.data() + lines_;
    for (std::size_t a = 0; a < lines_; ++a)
        if (!(line_damping_[a] > 0.0)) return false;
    for (std::size_t k = 0; k < loads_; ++k)
        if (!(capacitance_[k] - tau_max_ * p_[static_cast<Eigen::Index>(k)] / (v[k] * v[k]) > 0.0)) return false;
    return true;
}

PotentialSample BraytonMoser::sample(std::span<const double> x, std::span<const double> dxdt) const {
    PotentialSample s;
    s.g = co_content(x);
    const double* v = x.data() + lines_;
    const double* di = dxdt.data();
    const double* dv = dxdt.data() + lines_;

    double transient = 0.0;
    double decay = 0.0;
    for (std::size_t a = 0; a < lines_; ++a) {
        transient += 0.5 * line_weight_[a] * di[a] * di[a];
        decay += line_damping_[a] * di[a] * di[a];
    }
    for (std::size_t k = 0; k < loads_; ++k) {
        transient += 0.5 * tau_max_ * capacitance_[k] * dv[k] * dv[k];
        decay += (capacitance_[k] - tau_max_ * p_[static_cast<Eigen::Index>(k)] / (v[k] * v[k])) * dv[k] * dv[k];
    }
    s.p_total = s.g + transient;
    s.p_dot = -decay;
    s.q_definite = q_definite(x);
    return s;
}

double BraytonMoser::increment(std::span<const double> xa, std::span<const double> dxa,
                               std::span<const double> step, std::span<const double> dxb) const {
    const double* va = xa.data() + lines_;
    const double* dv = step.data() + lines_;
    double delta = 0.0;
    for (std::size_t a = 0; a < lines_; ++a) {
        const double fa = from_slot_[a] < 0 ? v0_ : va[from_slot_[a]];
        const double ta = to_slot_[a] < 0 ? v0_ : va[to_slot_[a]];
        const double dfrom = from_slot_[a] < 0 ? 0.0 : dv[from_slot_[a]];
        const double dto = to_slot_[a] < 0 ? 0.0 : dv[to_slot_[a]];
        const double d_old = fa - ta;
        const double change = dfrom - dto;
        delta += change * (2.0 * d_old + change) / (2.0 * resistance_[a]);

        const double dia = dxa[a];
        const double dib = dxb[a];
        delta += 0.5 * line_weight_[a] * (dib - dia) * (dib + dia);
    }
    for (std::size_t k = 0; k < loads_; ++k) {
        delta += p_[static_cast<Eigen::Index>(k)] * std::log1p(dv[k] / va[k]);
        const double dva = dxa[lines_ + k];
        const double dvb = dxb[lines_ + k];
        delta += 0.5 * tau_max_ * capacitance_[k] * (dvb - dva) * (dvb + dva);
    }
    return delta;
}

PotentialSample bm_potential(const NetworkSpec& spec, const SystemState& state, const Eigen::VectorXd& p) {
    const Dynamics dynamics(spec, p);
    const auto x = dynamics.pack(state);
    std::vector<double> dx(x.size());
    dynamics(x, dx);
    return BraytonMoser(spec, p).sample(x, dx);
}

Eigen::MatrixXd q_matrix(const NetworkSpec& spec, const SystemState& state, const Eigen::VectorXd& p) {
    if ((state.v_loads.array() <= 0.0).any()) throw DomainError("Q requires positive load voltages");
    const auto ne = static_cast<Eigen::Index>(spec.num_lines());
    const auto nl = static_cast<Eigen::Index>(spec.num_loads());
    const double tau_max = spec.params().tau_max;
    const Eigen::MatrixXd nabla = load_incidence(spec);

    Eigen::MatrixXd q = Eigen::MatrixXd::Zero(ne + nl, ne + nl);
    for (Eigen::Index a = 0; a < ne; ++a) {
        const auto& l = spec.line(static_cast<LineId>(a));
        q(a, a) = tau_max * l.resistance - l.inductance;
    }
    for (Eigen::Index k = 0; k < nl; ++k) {
        const double v = state.v_loads[k];
        q(ne + k, ne + k) = spec.node(spec.load_nodes()[static_cast<std::size_t>(k)]).capacitance - tau_max * p[k] / (v * v);
    }
    q.topRightCorner(ne, nl) = -tau_max * nabla;
    q.bottomLeftCorner(nl, ne) = tau_max * nabla.transpose();
    return q;
}

bool q_positive_definite(const NetworkSpec& spec, const SystemState& state, const Eigen::VectorXd& p) {
    if ((state.v_loads.array() <= 0.0).any()) throw DomainError("Q requires positive load voltages");
    const Dynamics layout(spec, p);
    return BraytonMoser(spec, p).q_definite(layout.pack(state));
}

}  // namespace adhocgrid

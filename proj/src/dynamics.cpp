#include "adhocgrid/dynamics.hpp"

#include <stdexcept>
#include <string>

#include "adhocgrid/errors.hpp"

namespace adhocgrid {

Dynamics::Dynamics(const NetworkSpec& spec, Eigen::VectorXd p)
    : v0_(spec.params().v0), lines_(spec.num_lines()), loads_(spec.num_loads()) {
    auto slot = [&](NodeId id) -> std::ptrdiff_t {
        const auto j = spec.load_index(id);
        return j ? static_cast<std::ptrdiff_t>(*j) : -1;
    };
    for (const auto& l : spec.lines()) {
        from_slot_.push_back(slot(l.from));
        to_slot_.push_back(slot(l.to));
        resistance_.push_back(l.resistance);
        inductance_.push_back(l.inductance);
    }
    for (NodeId k : spec.load_nodes()) capacitance_.push_back(spec.node(k).capacitance);
    set_powers(std::move(p));
}

void Dynamics::set_powers(Eigen::VectorXd p) {
    if (static_cast<std::size_t>(p.size()) != loads_)
        throw std::invalid_argument("power vector has " + std::to_string(p.size()) + " entries, expected " +
                                    std::to_string(loads_));
    p_ = std::move(p);
}

void Dynamics::operator()(std::span<const double> x, std::span<double> dxdt) const {
    const double* i = x.data();
    const double* v = x.data() + lines_;
    double* di = dxdt.data();
    double* dv = dxdt.data() + lines_;

    for (std::size_t k = 0; k < loads_; ++k) {
        if (!(v[k] > 0.0)) throw DomainError("load voltage collapsed to " + std::to_string(v[k]));
        dv[k] = -p_[static_cast<Eigen::Index>(k)] / v[k];
    }
    for (std::size_t a = 0; a < lines_; ++a) {
        const double v_from = from_slot_[a] < 0 ? v0_ : v[from_slot_[a]];
        const double v_to = to_slot_[a] < 0 ? v0_ : v[to_slot_[a]];
        di[a] = (-resistance_[a] * i[a] + v_from - v_to) / inductance_[a];
        if (from_slot_[a] >= 0) dv[from_slot_[a]] -= i[a];
        if (to_slot_[a] >= 0) dv[to_slot_[a]] += i[a];
    }
    for (std::size_t k = 0; k < loads_; ++k) dv[k] /= capacitance_[k];
}

void Dynamics::deviation(std::span<const double> origin, std::span<const double> f_origin,
                         std::span<const double> y, std::span<double> dydt) const {
    const double* vo = origin.data() + lines_;
    const double* yi = y.data();
    const double* yv = y.data() + lines_;
    double* di = dydt.data();
    double* dv = dydt.data() + lines_;

    for (std::size_t k = 0; k < loads_; ++k) {
        const double v = vo[k] + yv[k];
        if (!(v > 0.0)) throw DomainError("load voltage collapsed to " + std::to_string(v));
        // -p/v + p/vo
        dv[k] = p_[static_cast<Eigen::Index>(k)] * yv[k] / (vo[k] * v);
    }
    for (std::size_t a = 0; a < lines_; ++a) {
        const double y_from = from_slot_[a] < 0 ? 0.0 : yv[from_slot_[a]];
        const double y_to = to_slot_[a] < 0 ? 0.0 : yv[to_slot_[a]];
        di[a] = f_origin[a] + (-resistance_[a] * yi[a] + y_from - y_to) / inductance_[a];
        if (from_slot_[a] >= 0) dv[from_slot_[a]] -= yi[a];
        if (to_slot_[a] >= 0) dv[to_slot_[a]] += yi[a];
    }
    for (std::size_t k = 0; k < loads_; ++k) dv[k] = f_origin[lines_ + k] + dv[k] / capacitance_[k];
}

std::vector<double> Dynamics::pack(const SystemState& state) const {
    std::vector<double> x(dimension());
    for (std::size_t a = 0; a < lines_; ++a) x[a] = state.i_lines[static_cast<Eigen::Index>(a)];
    for (std::size_t k = 0; k < loads_; ++k) x[lines_ + k] = state.v_loads[static_cast<Eigen::Index>(k)];
    return x;
}

SystemState Dynamics::unpack(std::span<const double> x, double time) const {
    SystemState s;
    s.i_lines = Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(lines_));
    s.v_loads = Eigen::Map<const Eigen::VectorXd>(x.data() + lines_, static_cast<Eigen::Index>(loads_));
    s.time = time;
    return s;
}

StateDerivative rhs(const NetworkSpec& spec, const SystemState& state, const Eigen::VectorXd& p) {
    const Dynamics dynamics(spec, p);
    const auto x = dynamics.pack(state);
    std::vector<double> dx(x.size());
    dynamics(x, dx);
    const SystemState d = dynamics.unpack(dx, state.time);
    return {d.i_lines, d.v_loads};
}

}  // namespace adhocgrid

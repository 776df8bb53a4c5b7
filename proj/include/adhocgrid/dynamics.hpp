#pragma once

// Network ODE: RL line currents and capacitor-backed constant-power load
// voltages, with sources held at V0.

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "adhocgrid/network.hpp"

namespace adhocgrid {

/// Load-bus voltages and line currents at one instant.
struct SystemState {
    Eigen::VectorXd v_loads;
    Eigen::VectorXd i_lines;
    double time = 0.0;
};

struct StateDerivative {
    Eigen::VectorXd di;  // per line
    Eigen::VectorXd dv;  // per load
};

/// Line and load dynamics:
///   L_a di_a/dt = -R_a i_a + (v_from - v_to)
///   C_k dv_k/dt = -p_k / v_k - (net current leaving k through lines)
/// Throws DomainError if a load voltage is not positive.
StateDerivative rhs(const NetworkSpec& spec, const SystemState& state, const Eigen::VectorXd& p);

/// Flat-array form of `rhs` for the integrator. State layout is
/// [i_lines..., v_loads...]; the same layout is used for the derivative.
class Dynamics {
public:
    Dynamics(const NetworkSpec& spec, Eigen::VectorXd p);

    std::size_t dimension() const noexcept { return lines_ + loads_; }
    std::size_t num_lines() const noexcept { return lines_; }
    std::size_t num_loads() const noexcept { return loads_; }

    const Eigen::VectorXd& powers() const noexcept { return p_; }
    void set_powers(Eigen::VectorXd p);

    void operator()(std::span<const double> x, std::span<double> dxdt) const;

    /// Derivative at origin + y, given f_origin = f(origin). The difference
    /// f(origin + y) - f(origin) is expanded exactly, so rounding scales with
    /// |y| rather than with the state.
    void deviation(std::span<const double> origin, std::span<const double> f_origin, std::span<const double> y,
                   std::span<double> dydt) const;

    std::vector<double> pack(const SystemState& state) const;
    SystemState unpack(std::span<const double> x, double time) const;

private:
    double v0_;
    std::size_t lines_;
    std::size_t loads_;
    // Per line: endpoint slots into the load block, or -1 for a source.
    std::vector<std::ptrdiff_t> from_slot_;
    std::vector<std::ptrdiff_t> to_slot_;
    std::vector<double> resistance_;
    std::vector<double> inductance_;
    std::vector<double> capacitance_;
    Eigen::VectorXd p_;
};

}  // namespace adhocgrid

#pragma once

// Brayton-Moser machinery for the microgrid: the resistive co-content G,
// the mixed potential P built on it, and the decay rate dP/dt = -x'^T Q x'.

#include <span>

#include <Eigen/Dense>

#include "adhocgrid/dynamics.hpp"
#include "adhocgrid/equilibrium.hpp"
#include "adhocgrid/network.hpp"

namespace adhocgrid {

struct PotentialSample {
    double g = 0.0;        // co-content
    double p_total = 0.0;  // mixed potential
    double p_dot = 0.0;    // analytic decay rate
    bool q_definite = false;
};

/// sum over lines (v_i - v_j)^2 / (2 R_ij) + sum over loads p_k log v_k.
/// `v_full` is indexed by node id.
double co_content(const NetworkSpec& spec, const Eigen::VectorXd& v_full, const Eigen::VectorXd& p);

/// Equilibrium-only rewrite of the co-content in terms of load currents:
/// sum over loads (p_k / v_k)(V0 - v_k)/2 + p_k log v_k.
/// Throws NotAtEquilibrium if `eq` does not satisfy the power flow for `p`.
double co_content_losses_form(const NetworkSpec& spec, const EquilibriumResult& eq, const Eigen::VectorXd& p);

/// Evaluates the potential family for a fixed load vector. Keeps per-line
/// weights so the simulator can sample every accepted step cheaply.
class BraytonMoser {
public:
    BraytonMoser(const NetworkSpec& spec, const Eigen::VectorXd& p);

    /// `x` and `dxdt` use the `Dynamics` layout [i_lines..., v_loads...].
    PotentialSample sample(std::span<const double> x, std::span<const double> dxdt) const;

    /// P(a + step) - P(a) evaluated without subtracting two nearly equal
    /// totals. Passing the step itself avoids rounding it through the states.
    double increment(std::span<const double> xa, std::span<const double> dxa, std::span<const double> step,
                     std::span<const double> dxb) const;

    double co_content(std::span<const double> x) const;
    bool q_definite(std::span<const double> x) const;

private:
    double v0_;
    double tau_max_;
    std::size_t lines_;
    std::size_t loads_;
    std::vector<std::ptrdiff_t> from_slot_;
    std::vector<std::ptrdiff_t> to_slot_;
    std::vector<double> resistance_;
    std::vector<double> line_weight_;   // (tau_max - tau_a) L_a
    std::vector<double> line_damping_;  // tau_max R_a - L_a
    std::vector<double> capacitance_;
    Eigen::VectorXd p_;
};

/// G, P, dP/dt and Q-definiteness at `state`, with the derivatives taken
/// from the network dynamics under load vector `p`.
PotentialSample bm_potential(const NetworkSpec& spec, const SystemState& state, const Eigen::VectorXd& p);

/// Block matrix
///   [ diag(tau_max R_a - L_a)     -tau_max N_EL                  ]
///   [ tau_max N_EL^T               diag(C_k - tau_max p_k/v_k^2) ]
/// over the state [i_lines, v_loads], N_EL being the load columns of the
/// incidence matrix.
Eigen::MatrixXd q_matrix(const NetworkSpec& spec, const SystemState& state, const Eigen::VectorXd& p);

/// The off-diagonal blocks are antisymmetric and drop out of x^T Q x, so
/// definiteness reduces to the sign of the diagonal entries.
bool q_positive_definite(const NetworkSpec& spec, const SystemState& state, const Eigen::VectorXd& p);

}  // namespace adhocgrid

#pragma once

// Equilibrium power flow: stationary points of the resistive co-content,
// two-bus closed forms and the nose curve.

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "adhocgrid/network.hpp"

namespace adhocgrid {

/// Apex of the two-bus nose curve, V0^2 / (4 r).
double nose_apex(double r, double v0);

/// Upper (stable) equilibrium of a source behind resistance `r` feeding a
/// constant-power load `p`. Throws InfeasiblePower above the apex.
double two_bus_v_high(double p, double r, double v0);
double two_bus_v_low(double p, double r, double v0);

/// Largest total load for which every admissible topology keeps its stable
/// equilibrium at or above `v_min`: v_min (v0 - v_min) / r_max.
double max_loadability(double v_min, double v0, double r_max);

enum class EquilibriumClass { HighVoltage, LowVoltageOrOther };

struct EquilibriumResult {
    Eigen::VectorXd v_sep;  // all nodes, sources pinned at V0
    Eigen::VectorXd i_sep;  // per line, oriented as declared
    bool converged = false;
    int iterations = 0;
    double residual_norm = 0.0;
    EquilibriumClass classification = EquilibriumClass::LowVoltageOrOther;
};

struct PowerFlowOptions {
    int max_iterations = 100;
    /// Residual threshold in units of P_max / V0 (falls back to P0 / V0 when
    /// P_max is zero).
    double relative_tolerance = 1e-10;
};

/// Gradient of the co-content with respect to load voltages; zero exactly
/// at the power-flow solutions. `v_full` is indexed by node id.
Eigen::VectorXd power_flow_residual(const NetworkSpec& spec, const Eigen::VectorXd& v_full,
                                    const Eigen::VectorXd& p);

/// Residual threshold used by `solve_power_flow` for this spec.
double power_flow_tolerance(const NetworkSpec& spec, const PowerFlowOptions& options = {});

/// Newton iteration on load voltages from the flat start v = V0, with step
/// halving to keep every iterate inside v_k > V0/2.
EquilibriumResult solve_power_flow(const NetworkSpec& spec, const Eigen::VectorXd& p,
                                   const PowerFlowOptions& options = {});

struct NosePoint {
    double p;
    double v_high;
    double v_low;
};

struct NoseCurve {
    std::vector<NosePoint> samples;
    double p0 = 0.0;
};

NoseCurve nose_curve(double r, double v0, std::size_t n);

/// Hessian of the co-content over load voltages: the line Laplacian
/// restricted to loads minus diag(p_k / v_k^2).
Eigen::MatrixXd hessian_g(const NetworkSpec& spec, const Eigen::VectorXd& v_full, const Eigen::VectorXd& p);

bool is_convex_at(const NetworkSpec& spec, const Eigen::VectorXd& v_full, const Eigen::VectorXd& p);

}  // namespace adhocgrid

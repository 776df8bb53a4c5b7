#pragma once

// Topology-independent capacitance requirements for constant-power loads.
//
// Three lower bounds are produced per load:
//   * decay bound     C > tau_max p_max_k / V_tr^2   keeps dP/dt < 0 while every
//                                                     load voltage stays above V_tr;
//   * transient bound C > max over admissible single-load switches of
//                     tau_max ((p- - p+)/V_high-)^2 / (2 (G_tr+ - G_ini+)),
//                     which keeps the post-switch potential below its minimum
//                     on the boundary of the transient domain;
//   * necessary bound C > tau p_max_k / V_min^2 (small-signal stability of the
//                     two-bus worst case).
// A load is certified when it exceeds both the decay and transient bounds.

#include <cstddef>
#include <optional>
#include <vector>

#include "adhocgrid/network.hpp"

namespace adhocgrid {

double c_vtr_bound(double p_max_k, double tau_max, double v_tr);
double c_necessary_bound(double p_max_k, double tau, double v_min);

/// Lower bound of the co-content on the boundary of the transient domain
/// for post-switch total load `p_sigma_plus`.
double g_tr_plus(double p_sigma_plus, const GridParameters& g);

/// Upper bound of the post-switch co-content at the pre-switch equilibrium.
double g_ini_plus(double p_sigma_minus, double p_sigma_plus, const GridParameters& g);

struct SwitchingScenario {
    double p_sigma_minus = 0.0;
    double p_sigma_plus = 0.0;
};

/// Either a finite capacitance with the scenario that attains it, or
/// "uncertifiable" with a scenario where the energy margin is not positive.
struct TransientBound {
    bool certifiable = true;
    double capacitance = 0.0;  // +inf when not certifiable
    SwitchingScenario scenario;
};

/// Value of the transient objective at one switching scenario; +inf when
/// the energy margin G_tr+ - G_ini+ is not positive.
double transient_objective(double p_sigma_minus, double p_sigma_plus, const GridParameters& g);

struct TransientSearchOptions {
    std::size_t grid_points = 200;  // per axis
    std::size_t max_simplex_iterations = 2000;
};

/// Maximizes the transient objective over p-, p+ <= P_max with
/// |p+ - p-| <= p_max_k: dense grid, then Nelder-Mead from the best cell.
/// Throws InfeasiblePower if P_max >= P0.
TransientBound c_transient_bound(double p_max_k, const GridParameters& g, const TransientSearchOptions& options = {});

/// Threshold loading beyond which no capacitance satisfies the transient
/// bound. Bisection to 1e-6 P0; the returned value is the low end of the
/// uncertifiable range.
double p_crit(const GridParameters& g);

/// Transient bound for an actual two-bus line (resistance r_max, time
/// constant tau_max) using its exact co-content instead of the network-wide
/// bounds. Not certifiable when G+(V_tr) <= G+(V_high-).
TransientBound two_bus_c_tr(double p_minus, double p_plus, const GridParameters& g);
TransientBound two_bus_worst_case(const GridParameters& g, const TransientSearchOptions& options = {});

struct DesignCurveSample {
    double delta_p_over_p0 = 0.0;
    double c_vtr_over_c0 = 0.0;
    double c_bound_over_c0 = 0.0;      // transient bound alone (+inf if uncertifiable)
    double c_transient_over_c0 = 0.0;  // sufficient requirement: max(decay, transient)
    double c_necessary_over_c0 = 0.0;
};

struct DesignCurves {
    std::vector<DesignCurveSample> samples;
    double c0 = 0.0;
    double p0 = 0.0;
    double p_crit = 0.0;
};

struct DesignCurveOptions {
    /// When unset, each sample treats the switching load as the entire
    /// system (P_max = delta p, V_min = V_high(delta p)) and the sweep covers
    /// (0, p_crit]. When set, P_max and V_min come from the parameters and
    /// the sweep covers (0, P_max].
    std::optional<double> fixed_p_max;
};

DesignCurves design_curves(const GridParameters& g, std::size_t n, const DesignCurveOptions& options = {});

enum class Verdict { Certified, NecessaryOnlyMet, Fails };

std::string to_string(Verdict verdict);

struct LoadCertificate {
    NodeId node = 0;
    double p_max = 0.0;
    double c_vtr = 0.0;
    TransientBound transient;
    double c_sufficient = 0.0;  // max(c_vtr, transient), +inf if uncertifiable
    double c_necessary = 0.0;
    double installed = 0.0;
    Verdict verdict = Verdict::Fails;
};

struct CertificationReport {
    std::vector<LoadCertificate> loads;
    double p_crit = 0.0;
    double max_loadability = 0.0;  // V_min (V0 - V_min) / R_max
    bool equilibrium_feasible = false;

    bool all_certified() const;
};

/// Throws ValidationError if the spec violates any modelling assumption.
CertificationReport certify_network(const NetworkSpec& spec);

}  // namespace adhocgrid

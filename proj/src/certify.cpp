#include "adhocgrid/certify.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include "adhocgrid/equilibrium.hpp"
#include "adhocgrid/errors.hpp"

namespace adhocgrid {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_positive(double value, const char* name) {
    if (!(value > 0.0)) throw DomainError(std::string(name) + " must be positive, got " + std::to_string(value));
}

/// Admissible switching set {p-, p+ in [0, P]} intersected with the band
/// |p+ - p-| <= delta, parameterized over the unit square so that clamping
/// the parameters is an exact projection onto the set.
struct SwitchingSet {
    double p_max;
    double delta;

    SwitchingScenario at(double u, double w) const {
        u = std::clamp(u, 0.0, 1.0);
        w = std::clamp(w, 0.0, 1.0);
        const double d = -delta + 2.0 * delta * u;
        const double lo = std::max(0.0, -d);
        const double hi = std::min(p_max, p_max - d);
        const double s = lo + w * (hi - lo);
        return {s, std::min(p_max, std::max(0.0, s + d))};
    }
};

struct SearchResult {
    double value = -kInf;
    SwitchingScenario scenario;
    bool hit_infinity = false;
};

struct SimplexContext {
    const SwitchingSet* set;
    const std::function<double(const SwitchingScenario&)>* objective;
    bool hit_infinity = false;
};

double simplex_cost(const gsl_vector* x, void* params) {
    auto* ctx = static_cast<SimplexContext*>(params);
    const double value = (*ctx->objective)(ctx->set->at(gsl_vector_get(x, 0), gsl_vector_get(x, 1)));
    if (!std::isfinite(value)) {
        ctx->hit_infinity = true;
        return -1e300;
    }
    return -value;
}

/// Grid over the parameter square followed by Nelder-Mead from the best
/// grid point. An infinite objective anywhere short-circuits the search.
SearchResult maximize_over(const SwitchingSet& set, const std::function<double(const SwitchingScenario&)>& objective,
                           const TransientSearchOptions& options) {
    const std::size_t n = std::max<std::size_t>(options.grid_points, 2);
    SearchResult best;
    double best_u = 0.0;
    double best_w = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double u = static_cast<double>(i) / static_cast<double>(n - 1);
        for (std::size_t j = 0; j < n; ++j) {
            const double w = static_cast<double>(j) / static_cast<double>(n - 1);
            const SwitchingScenario sc = set.at(u, w);
            const double value = objective(sc);
            if (!std::isfinite(value)) return {kInf, sc, true};
            if (value > best.value) {
                best = {value, sc, false};
                best_u = u;
                best_w = w;
            }
        }
    }

    SimplexContext ctx{&set, &objective};
    gsl_multimin_function fn{&simplex_cost, 2, &ctx};
    gsl_vector* x = gsl_vector_alloc(2);
    gsl_vector* step = gsl_vector_alloc(2);
    gsl_vector_set(x, 0, best_u);
    gsl_vector_set(x, 1, best_w);
    gsl_vector_set_all(step, 1.0 / static_cast<double>(n - 1));
    gsl_multimin_fminimizer* solver = gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, 2);
    gsl_multimin_fminimizer_set(solver, &fn, x, step);
    for (std::size_t it = 0; it < options.max_simplex_iterations; ++it) {
        if (gsl_multimin_fminimizer_iterate(solver) != GSL_SUCCESS) break;
        if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(solver), 1e-12) == GSL_SUCCESS) break;
    }
    const double u = gsl_vector_get(solver->x, 0);
    const double w = gsl_vector_get(solver->x, 1);
    const double refined = -solver->fval;
    gsl_multimin_fminimizer_free(solver);
    gsl_vector_free(step);
    gsl_vector_free(x);

    if (ctx.hit_infinity) return {kInf, set.at(u, w), true};
    if (refined > best.value) best = {refined, set.at(u, w), false};
    return best;
}

struct GslErrorsOff {
    gsl_error_handler_t* previous = gsl_set_error_handler_off();
    ~GslErrorsOff() { gsl_set_error_handler(previous); }
};

}  // namespace

double c_vtr_bound(double p_max_k, double tau_max, double v_tr) {
    require_positive(v_tr, "v_tr");
    return tau_max * p_max_k / (v_tr * v_tr);
}

double c_necessary_bound(double p_max_k, double tau, double v_min) {
    require_positive(v_min, "v_min");
    return tau * p_max_k / (v_min * v_min);
}

double g_tr_plus(double p_sigma_plus, const GridParameters& g) {
    const double drop = g.v_tr - g.v0;
    return drop * drop / (2.0 * g.r_max) + p_sigma_plus * std::log(g.v_tr);
}

double g_ini_plus(double p_sigma_minus, double p_sigma_plus, const GridParameters& g) {
    const double v_high = two_bus_v_high(p_sigma_minus, g.r_max, g.v0);
    return 0.5 * p_sigma_minus * (g.v0 - v_high) / v_high + p_sigma_plus * std::log(g.v0);
}

double transient_objective(double p_sigma_minus, double p_sigma_plus, const GridParameters& g) {
    const double margin = g_tr_plus(p_sigma_plus, g) - g_ini_plus(p_sigma_minus, p_sigma_plus, g);
    if (!(margin > 0.0)) return kInf;
    const double v_high = two_bus_v_high(p_sigma_minus, g.r_max, g.v0);
    const double jump = (p_sigma_minus - p_sigma_plus) / v_high;
    return g.tau_max * jump * jump / (2.0 * margin);
}

TransientBound c_transient_bound(double p_max_k, const GridParameters& g, const TransientSearchOptions& options) {
    if (!(g.p_max < g.p0()))
        throw InfeasiblePower("P_max " + std::to_string(g.p_max) + " must stay below P0 " + std::to_string(g.p0()));
    if (p_max_k < 0.0) throw DomainError("p_max_k must be nonnegative");

    // The margin G_tr+ - G_ini+ decreases in both p- and p+, so the whole
    // admissible set has a positive margin iff the corner (P_max, P_max) does.
    const SwitchingScenario corner{g.p_max, g.p_max};
    if (!(g_tr_plus(g.p_max, g) - g_ini_plus(g.p_max, g.p_max, g) > 0.0)) return {false, kInf, corner};
    if (p_max_k == 0.0 || g.p_max == 0.0) return {true, 0.0, corner};

    const GslErrorsOff quiet;
    const SwitchingSet set{g.p_max, std::min(p_max_k, g.p_max)};
    const std::function<double(const SwitchingScenario&)> objective = [&](const SwitchingScenario& s) {
        return transient_objective(s.p_sigma_minus, s.p_sigma_plus, g);
    };
    const SearchResult found = maximize_over(set, objective, options);
    if (found.hit_infinity) return {false, kInf, found.scenario};
    return {true, found.value, found.scenario};
}

double p_crit(const GridParameters& g) {
    const double p0 = g.p0();
    auto margin = [&](double p) { return g_tr_plus(p, g) - g_ini_plus(p, p, g); };
    double lo = 0.0;
    double hi = p0;
    if (!(margin(lo) > 0.0)) return 0.0;
    if (margin(hi) > 0.0) return p0;
    while (hi - lo > 1e-6 * p0) {
        const double mid = 0.5 * (lo + hi);
        (margin(mid) > 0.0 ? lo : hi) = mid;
    }
    return hi;
}

TransientBound two_bus_c_tr(double p_minus, double p_plus, const GridParameters& g) {
    const double v_high = two_bus_v_high(p_minus, g.r_max, g.v0);
    auto co_content = [&](double v) {
        const double drop = g.v0 - v;
        return drop * drop / (2.0 * g.r_max) + p_plus * std::log(v);
    };
    const double margin = co_content(g.v_tr) - co_content(v_high);
    const SwitchingScenario scenario{p_minus, p_plus};
    if (!(margin > 0.0)) return {false, kInf, scenario};
    const double jump = (p_minus - p_plus) / v_high;
    return {true, g.tau_max * jump * jump / (2.0 * margin), scenario};
}

TransientBound two_bus_worst_case(const GridParameters& g, const TransientSearchOptions& options) {
    if (!(g.p_max < g.p0()))
        throw InfeasiblePower("P_max " + std::to_string(g.p_max) + " must stay below P0 " + std::to_string(g.p0()));
    if (g.p_max == 0.0) return two_bus_c_tr(0.0, 0.0, g);

    const GslErrorsOff quiet;
    const SwitchingSet set{g.p_max, g.p_max};
    const std::function<double(const SwitchingScenario&)> objective = [&](const SwitchingScenario& s) {
        return two_bus_c_tr(s.p_sigma_minus, s.p_sigma_plus, g).capacitance;
    };
    const SearchResult found = maximize_over(set, objective, options);
    if (found.hit_infinity) return {false, kInf, found.scenario};
    return {true, found.value, found.scenario};
}

DesignCurves design_curves(const GridParameters& g, std::size_t n, const DesignCurveOptions& options) {
    if (n < 2) throw std::invalid_argument("design curves need at least two samples");
    DesignCurves curves;
    curves.c0 = g.c0();
    curves.p0 = g.p0();
    curves.p_crit = p_crit(g);

    const double sweep_end = options.fixed_p_max ? *options.fixed_p_max : curves.p_crit;
    curves.samples.reserve(n);
    for (std::size_t i = 1; i <= n; ++i) {
        const double dp = (i == n) ? sweep_end : sweep_end * static_cast<double>(i) / static_cast<double>(n);
        GridParameters local = g;
        double v_min = g.v_min;
        if (options.fixed_p_max) {
            local.p_max = *options.fixed_p_max;
        } else {
            local.p_max = dp;
            v_min = two_bus_v_high(dp, g.r_max, g.v0);
        }
        const TransientBound bound = c_transient_bound(dp, local);
        const double c_vtr = c_vtr_bound(dp, g.tau_max, g.v_tr);

        DesignCurveSample s;
        s.delta_p_over_p0 = dp / curves.p0;
        s.c_vtr_over_c0 = c_vtr / curves.c0;
        s.c_bound_over_c0 = bound.capacitance / curves.c0;
        s.c_transient_over_c0 = std::max(c_vtr, bound.capacitance) / curves.c0;
        s.c_necessary_over_c0 = c_necessary_bound(dp, g.tau_max, v_min) / curves.c0;
        curves.samples.push_back(s);
    }
    return curves;
}

std::string to_string(Verdict verdict) {
    switch (verdict) {
        case Verdict::Certified: return "Certified";
        case Verdict::NecessaryOnlyMet: return "NecessaryOnlyMet";
        case Verdict::Fails: return "Fails";
    }
    return "Unknown";
}

bool CertificationReport::all_certified() const {
    return std::all_of(loads.begin(), loads.end(),
                       [](const LoadCertificate& c) { return c.verdict == Verdict::Certified; });
}

CertificationReport certify_network(const NetworkSpec& spec) {
    auto violations = validate(spec);
    if (has_errors(violations)) throw ValidationError(std::move(violations));

    const auto& g = spec.params();
    CertificationReport report;
    report.p_crit = p_crit(g);
    report.max_loadability = max_loadability(g.v_min, g.v0, g.r_max);
    report.equilibrium_feasible = g.p_max <= report.max_loadability;

    for (NodeId k : spec.load_nodes()) {
        const auto& node = spec.node(k);
        LoadCertificate c;
        c.node = k;
        c.p_max = node.p_max;
        c.c_vtr = c_vtr_bound(node.p_max, g.tau_max, g.v_tr);
        c.transient = c_transient_bound(node.p_max, g);
        c.c_sufficient = c.transient.certifiable ? std::max(c.c_vtr, c.transient.capacitance) : kInf;
        c.c_necessary = c_necessary_bound(node.p_max, g.tau_max, g.v_min);
        c.installed = node.capacitance;
        if (c.transient.certifiable && c.installed > c.c_sufficient)
            c.verdict = Verdict::Certified;
        else if (c.installed > c.c_necessary)
            c.verdict = Verdict::NecessaryOnlyMet;
        else
            c.verdict = Verdict::Fails;
        report.loads.push_back(c);
    }
    return report;
}

}  // namespace adhocgrid

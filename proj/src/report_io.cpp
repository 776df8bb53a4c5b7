#include "adhocgrid/report_io.hpp"

#include <cmath>
#include <cstdio>

namespace adhocgrid {

std::string format_number(double value) {
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    if (std::isnan(value)) return "nan";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", value);
    return buf;
}

void write_nose_csv(std::ostream& out, const NoseCurve& curve) {
    out << "p,v_high,v_low\n";
    for (const auto& s : curve.samples)
        out << format_number(s.p) << ',' << format_number(s.v_high) << ',' << format_number(s.v_low) << '\n';
}

void write_design_curves_csv(std::ostream& out, const DesignCurves& curves) {
    out << "delta_p_over_p0,c_vtr_over_c0,c_bound_over_c0,c_transient_over_c0,c_necessary_over_c0\n";
    for (const auto& s : curves.samples)
        out << format_number(s.delta_p_over_p0) << ',' << format_number(s.c_vtr_over_c0) << ','
            << format_number(s.c_bound_over_c0) << ',' << format_number(s.c_transient_over_c0) << ','
            << format_number(s.c_necessary_over_c0) << '\n';
}

void write_equilibrium_csv(std::ostream& out, const NetworkSpec& spec, const EquilibriumResult& eq) {
    out << "kind,id,value\n";
    for (NodeId k = 0; k < spec.num_nodes(); ++k)
        out << "v," << k << ',' << format_number(eq.v_sep[static_cast<Eigen::Index>(k)]) << '\n';
    for (LineId a = 0; a < spec.num_lines(); ++a)
        out << "i," << a << ',' << format_number(eq.i_sep[static_cast<Eigen::Index>(a)]) << '\n';
}

void write_certification_csv(std::ostream& out, const CertificationReport& report) {
    out << "node,p_max,c_vtr,c_transient,c_sufficient,c_necessary,installed,worst_p_minus,worst_p_plus,verdict\n";
    for (const auto& c : report.loads)
        out << c.node << ',' << format_number(c.p_max) << ',' << format_number(c.c_vtr) << ','
            << format_number(c.transient.capacitance) << ',' << format_number(c.c_sufficient) << ','
            << format_number(c.c_necessary) << ',' << format_number(c.installed) << ','
            << format_number(c.transient.scenario.p_sigma_minus) << ','
            << format_number(c.transient.scenario.p_sigma_plus) << ',' << to_string(c.verdict) << '\n';
}

void write_certification_text(std::ostream& out, const NetworkSpec& spec, const CertificationReport& report) {
    const auto& g = spec.params();
    out << "P0 = " << format_number(g.p0()) << ", C0 = " << format_number(g.c0()) << '\n'
        << "P_max = " << format_number(g.p_max) << ", p_crit = " << format_number(report.p_crit) << " ("
        << format_number(report.p_crit / g.p0()) << " P0)\n"
        << "max loadability at V_min = " << format_number(report.max_loadability)
        << (report.equilibrium_feasible ? " (P_max admissible)\n" : " (P_max exceeds it)\n");
    for (const auto& c : report.loads) {
        out << "node " << c.node << ": " << to_string(c.verdict) << ", installed " << format_number(c.installed)
            << ", sufficient " << format_number(c.c_sufficient) << ", necessary " << format_number(c.c_necessary);
        if (!c.transient.certifiable) out << " (transient bound uncertifiable)";
        out << '\n';
    }
}

void write_trajectory_csv(std::ostream& out, const NetworkSpec& spec, const Trajectory& trajectory) {
    out << "time";
    for (NodeId k : spec.load_nodes()) out << ",v_" << k;
    for (LineId a = 0; a < spec.num_lines(); ++a) out << ",i_" << a;
    out << ",G,P,Pdot,event\n";

    std::size_t next_event = 0;
    for (std::size_t n = 0; n < trajectory.times.size(); ++n) {
        const auto& s = trajectory.states[n];
        const auto& pot = trajectory.potentials[n];
        out << format_number(trajectory.times[n]);
        for (Eigen::Index k = 0; k < s.v_loads.size(); ++k) out << ',' << format_number(s.v_loads[k]);
        for (Eigen::Index a = 0; a < s.i_lines.size(); ++a) out << ',' << format_number(s.i_lines[a]);
        out << ',' << format_number(pot.g) << ',' << format_number(pot.p_total) << ',' << format_number(pot.p_dot)
            << ',';
        if (next_event < trajectory.events.size() && trajectory.events[next_event].index == n) {
            const auto& e = trajectory.events[next_event].event;
            out << e.load << ':' << format_number(e.p_before) << ':' << format_number(e.p_after);
            ++next_event;
        }
        out << '\n';
    }
}

void write_fuzz_text(std::ostream& out, const FuzzReport& report) {
    out << "events: " << report.events << " (" << report.worst_case_events << " worst-case pattern)\n"
        << "accepted steps: " << report.accepted_steps << '\n'
        << "largest potential rise: " << format_number(report.max_potential_rise) << '\n'
        << "largest dP/dt mismatch: " << format_number(report.max_p_dot_mismatch) << '\n'
        << "lowest load voltage: " << format_number(report.min_voltage) << '\n'
        << "violations: 0\n";
}

void write_fuzz_csv(std::ostream& out, const FuzzReport& report) {
    out << "event,node,p_before,p_after,worst_case\n";
    for (std::size_t n = 0; n < report.cases.size(); ++n) {
        const auto& c = report.cases[n];
        out << n << ',' << c.event.load << ',' << format_number(c.event.p_before) << ','
            << format_number(c.event.p_after) << ',' << (c.worst_case_pattern ? 1 : 0) << '\n';
    }
}

}  // namespace adhocgrid

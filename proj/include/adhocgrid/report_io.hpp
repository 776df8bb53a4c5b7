#pragma once

// CSV and text renderings of solver results. Numbers use 12 significant
// digits so that output is reproducible byte for byte.

#include <ostream>
#include <string>

#include "adhocgrid/certify.hpp"
#include "adhocgrid/equilibrium.hpp"
#include "adhocgrid/network.hpp"
#include "adhocgrid/simulate.hpp"

namespace adhocgrid {

std::string format_number(double value);

void write_nose_csv(std::ostream& out, const NoseCurve& curve);
void write_design_curves_csv(std::ostream& out, const DesignCurves& curves);
void write_equilibrium_csv(std::ostream& out, const NetworkSpec& spec, const EquilibriumResult& eq);
void write_certification_csv(std::ostream& out, const CertificationReport& report);
void write_certification_text(std::ostream& out, const NetworkSpec& spec, const CertificationReport& report);

/// Columns: time, v_<node>..., i_<line>..., G, P, Pdot, event. The event
/// column names the switch ("node:p_before:p_after") on the first sample
/// taken with the new powers.
void write_trajectory_csv(std::ostream& out, const NetworkSpec& spec, const Trajectory& trajectory);

void write_fuzz_text(std::ostream& out, const FuzzReport& report);
void write_fuzz_csv(std::ostream& out, const FuzzReport& report);

}  // namespace adhocgrid

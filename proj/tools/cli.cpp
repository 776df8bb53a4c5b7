#include "cli.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "adhocgrid/certify.hpp"
#include "adhocgrid/equilibrium.hpp"
#include "adhocgrid/errors.hpp"
#include "adhocgrid/network_file.hpp"
#include "adhocgrid/random_network.hpp"
#include "adhocgrid/report_io.hpp"
#include "adhocgrid/simulate.hpp"

namespace adhocgrid {

namespace {

constexpr const char* kOutDirVariable = "ADHOCGRID_OUT_DIR";

/// Usage problems detected after CLI11 has accepted the arguments.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Resolves where a command's CSV goes: --out if given, else a file named
/// after the command in $ADHOCGRID_OUT_DIR, else `fallback`.
class OutputSink {
public:
    OutputSink(const std::string& out_flag, const std::string& default_name, std::ostream& fallback)
        : stream_(&fallback) {
        std::filesystem::path target;
        if (!out_flag.empty()) {
            target = out_flag;
        } else if (const char* dir = std::getenv(kOutDirVariable); dir != nullptr && *dir != '\0') {
            std::filesystem::create_directories(dir);
            target = std::filesystem::path(dir) / default_name;
        }
        if (!target.empty()) {
            file_ = std::make_unique<std::ofstream>(target);
            if (!*file_) throw std::runtime_error("cannot write " + target.string());
            stream_ = file_.get();
            path_ = target;
        }
    }

    std::ostream& stream() { return *stream_; }
    bool to_file() const { return file_ != nullptr; }
    const std::filesystem::path& path() const { return path_; }

private:
    std::unique_ptr<std::ofstream> file_;
    std::ostream* stream_;
    std::filesystem::path path_;
};

double parse_double(const std::string& text, const std::string& what) {
    double value = 0.0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc() || ptr != end || text.empty())
        throw UsageError(what + ": '" + text + "' is not a number");
    return value;
}

/// load:p_before:p_after:time
SwitchingEvent parse_event(const std::string& text) {
    std::vector<std::string> parts;
    std::stringstream in(text);
    for (std::string part; std::getline(in, part, ':');) parts.push_back(part);
    if (parts.size() != 4) throw UsageError("--event expects load:p_before:p_after:time, got '" + text + "'");
    const double node = parse_double(parts[0], "--event load");
    if (node < 0.0 || node != static_cast<double>(static_cast<std::size_t>(node)))
        throw UsageError("--event load must be a node id, got '" + parts[0] + "'");
    return {static_cast<std::size_t>(node), parse_double(parts[1], "--event p_before"),
            parse_double(parts[2], "--event p_after"), parse_double(parts[3], "--event time")};
}

Eigen::VectorXd load_vector(const NetworkSpec& spec, const std::vector<double>& given) {
    if (given.empty()) return spec.nominal_powers();
    if (given.size() != spec.num_loads())
        throw UsageError("--p-vector has " + std::to_string(given.size()) + " entries but the network has " +
                         std::to_string(spec.num_loads()) + " loads");
    return Eigen::Map<const Eigen::VectorXd>(given.data(), static_cast<Eigen::Index>(given.size()));
}

struct Flags {
    std::string network;
    std::string out;
    std::vector<double> p_vector;
    std::vector<std::string> events;
    std::optional<double> t_end;
    std::uint64_t seed = 1;
    std::size_t n = 100;
    std::size_t events_count = 50;
    std::size_t random_nodes = 6;
    std::optional<double> v0;
    std::optional<double> r_max;
    std::optional<double> tau_max;
    std::optional<double> p_max;
    std::optional<double> v_min;
    std::optional<double> v_tr;
};

GridParameters grid_from_flags(const Flags& f) {
    GridParameters g;
    if (!f.network.empty()) g = parse_network(f.network).params();
    if (f.v0) g.v0 = *f.v0;
    if (f.r_max) g.r_max = *f.r_max;
    if (f.tau_max) g.tau_max = *f.tau_max;
    if (f.v_min) g.v_min = *f.v_min;
    if (f.v_tr) g.v_tr = *f.v_tr;
    if (f.p_max) g.p_max = *f.p_max;
    if (!(g.v0 > 0.0 && g.r_max > 0.0 && g.tau_max > 0.0)) throw UsageError("v0, r_max and tau_max must be positive");
    if (!(g.v0 / 2.0 < g.v_tr && g.v_tr < g.v0)) throw UsageError("v_tr must lie in (v0/2, v0)");
    return g;
}

int cmd_equilibrium(const Flags& f, std::ostream& out) {
    const NetworkSpec spec = parse_network(f.network);
    const EquilibriumResult eq = solve_power_flow(spec, load_vector(spec, f.p_vector));
    OutputSink sink(f.out, "equilibrium.csv", out);
    write_equilibrium_csv(sink.stream(), spec, eq);
    return 0;
}

int cmd_nose(const Flags& f, std::ostream& out) {
    const GridParameters g = grid_from_flags(f);
    OutputSink sink(f.out, "nose.csv", out);
    write_nose_csv(sink.stream(), nose_curve(g.r_max, g.v0, f.n));
    return 0;
}

int cmd_certify(const Flags& f, std::ostream& out) {
    const NetworkSpec spec = parse_network(f.network);
    const CertificationReport report = certify_network(spec);
    write_certification_text(out, spec, report);
    if (!f.out.empty() || std::getenv(kOutDirVariable) != nullptr) {
        OutputSink sink(f.out, "certify.csv", out);
        write_certification_csv(sink.stream(), report);
    }
    return report.all_certified() ? 0 : 1;
}

int cmd_design_curves(const Flags& f, std::ostream& out) {
    const GridParameters g = grid_from_flags(f);
    DesignCurveOptions options;
    if (f.p_max) {
        if (!(g.v_tr <= g.v_min && g.v_min < g.v0)) throw UsageError("v_min must lie in [v_tr, v0)");
        options.fixed_p_max = *f.p_max;
    }
    OutputSink sink(f.out, "design_curves.csv", out);
    write_design_curves_csv(sink.stream(), design_curves(g, f.n, options));
    return 0;
}

int cmd_simulate(const Flags& f, std::ostream& out, std::ostream& err) {
    const NetworkSpec spec = parse_network(f.network);
    Eigen::VectorXd p = load_vector(spec, f.p_vector);

    std::vector<SwitchingEvent> events;
    for (const auto& text : f.events) events.push_back(parse_event(text));
    std::stable_sort(events.begin(), events.end(),
                     [](const SwitchingEvent& a, const SwitchingEvent& b) { return a.time < b.time; });
    std::vector<bool> seen(spec.num_nodes(), false);
    for (const auto& e : events) {
        check_event(spec, e);
        if (e.time < 0.0) throw UsageError("event times must be nonnegative");
        if (!seen[e.load]) p[static_cast<Eigen::Index>(*spec.load_index(e.load))] = e.p_before;
        seen[e.load] = true;
    }

    const double tau_max = spec.params().tau_max;
    const double last_event = events.empty() ? 0.0 : events.back().time;
    const double t_end = f.t_end ? *f.t_end : last_event + 1000.0 * tau_max;
    if (t_end < last_event) throw UsageError("--t-end precedes the last event");

    Simulation sim(spec, equilibrium_state(spec, p), p);
    for (const auto& e : events) {
        if (sim.run_until(e.time) != TrajectoryVerdict::ConvergedToSep && sim.finished()) break;
        const auto slot = static_cast<Eigen::Index>(*spec.load_index(e.load));
        if (std::abs(sim.powers()[slot] - e.p_before) > 1e-12 * std::max(1.0, std::abs(e.p_before)))
            throw UsageError("event on node " + std::to_string(e.load) + " expects p_before " +
                             format_number(e.p_before) + " but the load draws " + format_number(sim.powers()[slot]));
        sim.apply_event(e);
    }
    const TrajectoryVerdict verdict = sim.finished() ? sim.trajectory().verdict : sim.run_until(t_end, !f.t_end);

    OutputSink sink(f.out, "trajectory.csv", out);
    write_trajectory_csv(sink.stream(), spec, sim.trajectory());
    err << "verdict: " << to_string(verdict) << '\n';
    return verdict == TrajectoryVerdict::ConvergedToSep ? 0 : 1;
}

int cmd_fuzz(const Flags& f, std::ostream& out, std::ostream& err) {
    NetworkSpec spec = f.network.empty() ? random_network({.num_nodes = f.random_nodes}, f.seed)
                                         : parse_network(f.network);
    try {
        const FuzzReport report = verify_certificate(spec, f.events_count, f.seed);
        write_fuzz_text(out, report);
        if (!f.out.empty() || std::getenv(kOutDirVariable) != nullptr) {
            OutputSink sink(f.out, "fuzz.csv", out);
            write_fuzz_csv(sink.stream(), report);
        }
        return 0;
    } catch (const CertificateViolation& v) {
        err << "certificate violation: " << v.what() << '\n';
        const auto& c = v.fuzz_case();
        err << "event " << c.event.load << ':' << format_number(c.event.p_before) << ':'
            << format_number(c.event.p_after) << ", trajectory verdict " << to_string(v.trajectory().verdict)
            << '\n';
        OutputSink sink(f.out, "fuzz_counterexample.csv", out);
        write_trajectory_csv(sink.stream(), spec, v.trajectory());
        return 1;
    }
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Capacitor certificates and transient simulation for ad hoc DC microgrids", "adhocgrid"};
    app.require_subcommand(1);
    Flags f;

    auto add_out = [&](CLI::App* cmd) {
        cmd->add_option("--out", f.out, std::string("Output file (default: stdout, or $") + kOutDirVariable + ")");
    };
    auto add_grid = [&](CLI::App* cmd) {
        cmd->add_option("--v0", f.v0, "Source voltage");
        cmd->add_option("--rmax", f.r_max, "Aggregate line resistance budget");
        cmd->add_option("--tau-max", f.tau_max, "Line time-constant bound");
        cmd->add_option("--vtr", f.v_tr, "Transient voltage floor");
    };

    auto* equilibrium = app.add_subcommand("equilibrium", "Solve the power flow and print node voltages and line currents");
    equilibrium->add_option("network", f.network, "Network file")->required()->check(CLI::ExistingFile);
    equilibrium->add_option("--p-vector", f.p_vector, "Load powers in load order (default: nominal)")->delimiter(',');
    add_out(equilibrium);

    auto* nose = app.add_subcommand("nose", "Two-bus nose curve as CSV");
    nose->add_option("network", f.network, "Network file supplying v0 and r_max")->check(CLI::ExistingFile);
    nose->add_option("--n", f.n, "Number of samples")->capture_default_str();
    add_grid(nose);
    add_out(nose);

    auto* certify = app.add_subcommand("certify", "Capacitance certificates for every load");
    certify->add_option("network", f.network, "Network file")->required()->check(CLI::ExistingFile);
    add_out(certify);

    auto* design = app.add_subcommand("design-curves", "Normalized capacitance requirements versus load step");
    design->add_option("network", f.network, "Network file supplying the grid parameters")->check(CLI::ExistingFile);
    design->add_option("--n", f.n, "Number of samples")->capture_default_str();
    design->add_option("--pmax", f.p_max, "Fixed system loadability (default: the step itself)");
    design->add_option("--vmin", f.v_min, "Equilibrium voltage floor used with --pmax");
    add_grid(design);
    add_out(design);

    auto* simulate = app.add_subcommand("simulate", "Transient simulation with switching events");
    simulate->add_option("network", f.network, "Network file")->required()->check(CLI::ExistingFile);
    simulate->add_option("--p-vector", f.p_vector, "Initial load powers in load order (default: nominal)")
        ->delimiter(',');
    simulate->add_option("--event", f.events, "Switching event load:p_before:p_after:time (repeatable)");
    simulate->add_option("--t-end", f.t_end, "End time (default: stop once settled after the last event)");
    add_out(simulate);

    auto* fuzz = app.add_subcommand("fuzz", "Randomized switching events against the certificates");
    fuzz->add_option("network", f.network, "Network file (default: a random certified network)")
        ->check(CLI::ExistingFile);
    fuzz->add_option("--events", f.events_count, "Number of switching events")->capture_default_str();
    fuzz->add_option("--seed", f.seed, "Random seed")->capture_default_str();
    fuzz->add_option("--nodes", f.random_nodes, "Node count of the random network")->capture_default_str();
    add_out(fuzz);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n' << "run with --help for usage\n";
        return 2;
    }

    try {
        if (equilibrium->parsed()) return cmd_equilibrium(f, out);
        if (nose->parsed()) return cmd_nose(f, out);
        if (certify->parsed()) return cmd_certify(f, out);
        if (design->parsed()) return cmd_design_curves(f, out);
        if (simulate->parsed()) return cmd_simulate(f, out, err);
        if (fuzz->parsed()) return cmd_fuzz(f, out, err);
    } catch (const ParseError& e) {
        err << "error: " << f.network << ": " << e.what() << '\n';
    } catch (const ValidationError& e) {
        err << "error: " << f.network << " is not an admissible network\n";
        for (const auto& v : e.violations())
            if (v.severity == Severity::Error) err << "  " << to_string(v.kind) << ": " << v.message << '\n';
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
    }
    return 2;
}

}  // namespace adhocgrid

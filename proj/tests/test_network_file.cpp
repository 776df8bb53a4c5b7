#include <doctest.h>

#include <sstream>

#include "adhocgrid/network_file.hpp"
#include "adhocgrid/random_network.hpp"

using namespace adhocgrid;

namespace {

const char* kTwoBus = R"(# minimal example
[globals]
v0 = 1
r_max = 1
tau_max = 1
p_max = 0.1
v_min = 0.8
v_tr = 0.66

[nodes]
id=0 kind=source
id=1 kind=load p_nominal=0.05 p_max=0.1 capacitance=2   # input capacitor

[edges]
from=0 to=1 resistance=1 inductance=0.5
)";

std::string replace(std::string text, const std::string& from, const std::string& to) {
    text.replace(text.find(from), from.size(), to);
    return text;
}

}  // namespace

TEST_CASE("minimal two-bus document") {
    const NetworkSpec spec = parse_network_text(kTwoBus);
    CHECK(spec.num_nodes() == 2);
    CHECK(spec.num_lines() == 1);
    CHECK(spec.node(1).capacitance == 2.0);
    CHECK(spec.line(0).inductance == 0.5);
    CHECK(spec.params().v_tr == 0.66);
}

TEST_CASE("missing global names the key") {
    try {
        parse_network_text(replace(kTwoBus, "tau_max = 1\n", ""));
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("tau_max") != std::string::npos);
    }
}

TEST_CASE("malformed documents") {
    CHECK_THROWS_AS(parse_network_text(replace(kTwoBus, "id=1 kind=load", "id=0 kind=load")), ParseError);
    CHECK_THROWS_AS(parse_network_text(replace(kTwoBus, "id=1 kind=load", "id=2 kind=load")), ParseError);
    CHECK_THROWS_AS(parse_network_text(replace(kTwoBus, "v0 = 1", "v0 = 1\nvoltage = 3")), ParseError);
    CHECK_THROWS_AS(parse_network_text(replace(kTwoBus, "capacitance=2", "capacitance=2 color=red")), ParseError);
    CHECK_THROWS_AS(parse_network_text(replace(kTwoBus, "resistance=1", "resistance=one")), ParseError);
    CHECK_THROWS_AS(parse_network_text(replace(kTwoBus, " inductance=0.5", "")), ParseError);
    CHECK_THROWS_AS(parse_network_text(replace(kTwoBus, "[edges]", "[lines]")), ParseError);
    CHECK_THROWS_AS(parse_network_text(replace(kTwoBus, "kind=source", "kind=battery")), ParseError);
    CHECK_THROWS_AS(parse_network_text(replace(kTwoBus, "kind=source", "kind=source capacitance=1")), ParseError);
    CHECK_THROWS_AS(parse_network_text(std::string("v0 = 1\n") + kTwoBus), ParseError);
}

TEST_CASE("parse errors carry the line number") {
    try {
        parse_network_text(replace(kTwoBus, "id=1 kind=load", "id=0 kind=load"));
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 12);
    }
}

TEST_CASE("inadmissible networks raise ValidationError") {
    CHECK_THROWS_AS(parse_network_text(replace(kTwoBus, "inductance=0.5", "inductance=1.5")), ValidationError);
}

TEST_CASE("written networks parse back unchanged") {
    for (std::uint64_t seed = 0; seed < 25; ++seed) {
        const auto spec = random_network({.num_nodes = 7, .num_sources = 2, .randomize_units = true}, seed);
        std::ostringstream out;
        write_network(out, spec);
        CHECK(parse_network_text(out.str()) == spec);
    }
}

TEST_CASE("missing file") {
    CHECK_THROWS_AS(parse_network("/nonexistent/grid.net"), std::runtime_error);
}

#pragma once

// Plain-text network description:
//
//   [globals]
//   v0 = 1
//   r_max = 1
//   tau_max = 1
//   p_max = 0.1
//   v_min = 0.75
//   v_tr = 0.66
//
//   [nodes]
//   id=0 kind=source
//   id=1 kind=load p_nominal=0.05 p_max=0.1 capacitance=1.5
//
//   [edges]
//   from=0 to=1 resistance=1 inductance=0.5
//
// '#' starts a comment. Node ids must be 0..n-1, each listed once.

#include <filesystem>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>

#include "adhocgrid/network.hpp"

namespace adhocgrid {

class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t line, const std::string& message)
        : std::runtime_error("line " + std::to_string(line) + ": " + message), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Throws ParseError on malformed input and ValidationError if the result
/// violates a modelling assumption.
NetworkSpec parse_network_text(std::string_view text);
NetworkSpec parse_network(const std::filesystem::path& path);

/// Writes a document that parses back to an identical spec.
void write_network(std::ostream& out, const NetworkSpec& spec);

}  // namespace adhocgrid

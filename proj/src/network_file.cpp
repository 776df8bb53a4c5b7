#include "adhocgrid/network_file.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <vector>

namespace adhocgrid {

namespace {

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_number(std::string_view text, std::size_t line, std::string_view key) {
    double value = 0.0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc() || ptr != end || text.empty())
        throw ParseError(line, "value '" + std::string(text) + "' for '" + std::string(key) + "' is not a number");
    return value;
}

std::size_t parse_index(std::string_view text, std::size_t line, std::string_view key) {
    std::size_t value = 0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc() || ptr != end || text.empty())
        throw ParseError(line, "value '" + std::string(text) + "' for '" + std::string(key) +
                                   "' is not a nonnegative integer");
    return value;
}

/// key=value tokens of one record line, with unknown and repeated keys rejected.
using Record = std::map<std::string, std::string, std::less<>>;

Record parse_record(std::string_view body, std::size_t line, const std::set<std::string, std::less<>>& allowed) {
    Record rec;
    std::istringstream tokens{std::string(body)};
    std::string token;
    while (tokens >> token) {
        const auto eq = token.find('=');
        if (eq == std::string::npos || eq == 0 || eq + 1 == token.size())
            throw ParseError(line, "expected key=value, got '" + token + "'");
        std::string key = token.substr(0, eq);
        if (!allowed.contains(key)) throw ParseError(line, "unknown key '" + key + "'");
        if (!rec.emplace(key, token.substr(eq + 1)).second) throw ParseError(line, "repeated key '" + key + "'");
    }
    return rec;
}

const std::string& require(const Record& rec, const std::string& key, std::size_t line) {
    const auto it = rec.find(key);
    if (it == rec.end()) throw ParseError(line, "missing key '" + key + "'");
    return it->second;
}

struct PendingNode {
    Node node;
    std::size_t line;
};

}  // namespace

NetworkSpec parse_network_text(std::string_view text) {
    enum class Section { None, Globals, Nodes, Edges };
    Section section = Section::None;

    const std::set<std::string, std::less<>> global_keys{"v0", "r_max", "tau_max", "p_max", "v_min", "v_tr"};
    const std::set<std::string, std::less<>> node_keys{"id", "kind", "p_nominal", "p_max", "capacitance"};
    const std::set<std::string, std::less<>> edge_keys{"from", "to", "resistance", "inductance"};

    std::map<std::string, double, std::less<>> globals;
    std::map<std::size_t, PendingNode> nodes;
    std::vector<Line> lines;
    std::set<std::string> seen_sections;

    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        std::string_view raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;

        if (const auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
        const std::string_view body = trim(raw);
        if (body.empty()) continue;

        if (body.front() == '[') {
            if (body.back() != ']') throw ParseError(line_no, "unterminated section header");
            const std::string name(trim(body.substr(1, body.size() - 2)));
            if (name == "globals") section = Section::Globals;
            else if (name == "nodes") section = Section::Nodes;
            else if (name == "edges") section = Section::Edges;
            else throw ParseError(line_no, "unknown section '" + name + "'");
            if (!seen_sections.insert(name).second) throw ParseError(line_no, "repeated section '" + name + "'");
            continue;
        }

        switch (section) {
            case Section::None: throw ParseError(line_no, "content before the first section header");
            case Section::Globals: {
                const auto eq = body.find('=');
                if (eq == std::string_view::npos) throw ParseError(line_no, "expected key = value");
                const std::string key(trim(body.substr(0, eq)));
                if (!global_keys.contains(key)) throw ParseError(line_no, "unknown key '" + key + "'");
                const double value = parse_number(trim(body.substr(eq + 1)), line_no, key);
                if (!globals.emplace(key, value).second) throw ParseError(line_no, "repeated key '" + key + "'");
                break;
            }
            case Section::Nodes: {
                const Record rec = parse_record(body, line_no, node_keys);
                const std::size_t id = parse_index(require(rec, "id", line_no), line_no, "id");
                const std::string& kind = require(rec, "kind", line_no);
                Node node;
                if (kind == "source") {
                    for (const char* k : {"p_nominal", "p_max", "capacitance"})
                        if (rec.contains(k))
                            throw ParseError(line_no, std::string("key '") + k + "' does not apply to a source");
                } else if (kind == "load") {
                    node = Node::load(parse_number(require(rec, "p_nominal", line_no), line_no, "p_nominal"),
                                      parse_number(require(rec, "p_max", line_no), line_no, "p_max"),
                                      parse_number(require(rec, "capacitance", line_no), line_no, "capacitance"));
                } else {
                    throw ParseError(line_no, "unknown node kind '" + kind + "'");
                }
                if (!nodes.emplace(id, PendingNode{node, line_no}).second)
                    throw ParseError(line_no, "duplicate node id " + std::to_string(id));
                break;
            }
            case Section::Edges: {
                const Record rec = parse_record(body, line_no, edge_keys);
                lines.push_back({parse_index(require(rec, "from", line_no), line_no, "from"),
                                 parse_index(require(rec, "to", line_no), line_no, "to"),
                                 parse_number(require(rec, "resistance", line_no), line_no, "resistance"),
                                 parse_number(require(rec, "inductance", line_no), line_no, "inductance")});
                break;
            }
        }
    }

    for (const auto& key : global_keys)
        if (!globals.contains(key)) throw ParseError(line_no, "missing key '" + key + "' in [globals]");

    std::vector<Node> ordered;
    for (const auto& [id, pending] : nodes) {
        if (id != ordered.size())
            throw ParseError(pending.line, "node ids must be 0.." + std::to_string(nodes.size() - 1) +
                                               " without gaps, found " + std::to_string(id));
        ordered.push_back(pending.node);
    }

    GridParameters g;
    g.v0 = globals.at("v0");
    g.r_max = globals.at("r_max");
    g.tau_max = globals.at("tau_max");
    g.p_max = globals.at("p_max");
    g.v_min = globals.at("v_min");
    g.v_tr = globals.at("v_tr");
    NetworkSpec spec(g, std::move(ordered), std::move(lines));
    auto violations = validate(spec);
    if (has_errors(violations)) throw ValidationError(std::move(violations));
    return spec;
}

NetworkSpec parse_network(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open network file " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_network_text(buffer.str());
}

void write_network(std::ostream& out, const NetworkSpec& spec) {
    auto num = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return std::string(buf);
    };
    const auto& g = spec.params();
    out << "[globals]\n"
        << "v0 = " << num(g.v0) << "\n"
        << "r_max = " << num(g.r_max) << "\n"
        << "tau_max = " << num(g.tau_max) << "\n"
        << "p_max = " << num(g.p_max) << "\n"
        << "v_min = " << num(g.v_min) << "\n"
        << "v_tr = " << num(g.v_tr) << "\n\n[nodes]\n";
    for (NodeId id = 0; id < spec.num_nodes(); ++id) {
        const Node& n = spec.node(id);
        out << "id=" << id;
        if (n.is_load())
            out << " kind=load p_nominal=" << num(n.p_nominal) << " p_max=" << num(n.p_max)
                << " capacitance=" << num(n.capacitance) << "\n";
        else
            out << " kind=source\n";
    }
    out << "\n[edges]\n";
    for (const Line& l : spec.lines())
        out << "from=" << l.from << " to=" << l.to << " resistance=" << num(l.resistance)
            << " inductance=" << num(l.inductance) << "\n";
}

}  // namespace adhocgrid

#pragma once

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "creditnet/network.hpp"

namespace creditnet {

namespace detail {

// Splits a line on whitespace, dropping '#' comments.
inline std::vector<std::string> tokenize_line(const std::string& line)
{
    std::string body = line.substr(0, line.find('#'));
    std::istringstream in(body);
    std::vector<std::string> out;
    for (std::string t; in >> t;) out.push_back(t);
    return out;
}

inline unsigned long long parse_count(const std::string& s, std::size_t line_no)
{
    if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos)
        throw InvalidInput("line " + std::to_string(line_no) + ": expected a non-negative integer, got '" + s + "'");
    try {
        return std::stoull(s);
    } catch (const std::exception&) {
        throw InvalidInput("line " + std::to_string(line_no) + ": integer out of range '" + s + "'");
    }
}

inline NodeId parse_node(const std::string& s, std::size_t line_no)
{
    auto v = parse_count(s, line_no);
    if (v > 0xFFFFFFFFull) throw InvalidInput("line " + std::to_string(line_no) + ": node id too large");
    return static_cast<NodeId>(v);
}

} // namespace detail

// Graph file: "nodes N" then one "u v capacity" line per edge.
inline CreditNetwork read_graph(std::istream& in)
{
    std::string line;
    std::size_t line_no = 0;
    std::optional<std::size_t> nodes;
    std::vector<Edge> edges;
    std::vector<Tokens> caps;
    while (std::getline(in, line)) {
        ++line_no;
        auto tok = detail::tokenize_line(line);
        if (tok.empty()) continue;
        if (!nodes) {
            if (tok.size() != 2 || tok[0] != "nodes")
                throw InvalidInput("line " + std::to_string(line_no) + ": expected header 'nodes <N>'");
            nodes = detail::parse_count(tok[1], line_no);
            continue;
        }
        if (tok.size() != 3) throw InvalidInput("line " + std::to_string(line_no) + ": expected 'u v capacity'");
        NodeId u = detail::parse_node(tok[0], line_no);
        NodeId v = detail::parse_node(tok[1], line_no);
        if (u >= v) throw InvalidInput("line " + std::to_string(line_no) + ": edges must be written with u < v");
        Tokens c;
        try {
            c = parse_tokens(tok[2]);
        } catch (const InvalidInput& e) {
            throw InvalidInput("line " + std::to_string(line_no) + ": " + e.what());
        }
        edges.push_back({u, v});
        caps.push_back(c);
    }
    if (!nodes) throw InvalidInput("graph file has no 'nodes' header");
    return CreditNetwork(*nodes, std::move(edges), std::move(caps));
}

inline void write_graph(std::ostream& out, const CreditNetwork& net)
{
    out << "nodes " << net.node_count() << '\n';
    for (std::size_t k = 0; k < net.edge_count(); ++k)
        out << net.edge(k).u << ' ' << net.edge(k).v << ' ' << format_tokens(net.capacity(k)) << '\n';
}

// Path file: one "src dst n0 n1 ... nk" line per path.
inline PathSet read_paths(std::istream& in, const CreditNetwork& net)
{
    PathSet ps;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto tok = detail::tokenize_line(line);
        if (tok.empty()) continue;
        if (tok.size() < 4) throw InvalidInput("line " + std::to_string(line_no) + ": expected 'src dst n0 ... nk'");
        NodeId src = detail::parse_node(tok[0], line_no);
        NodeId dst = detail::parse_node(tok[1], line_no);
        std::vector<NodeId> seq;
        for (std::size_t i = 2; i < tok.size(); ++i) seq.push_back(detail::parse_node(tok[i], line_no));
        if (seq.front() != src || seq.back() != dst)
            throw InvalidInput("line " + std::to_string(line_no) + ": node sequence does not run from src to dst");
        Path p;
        try {
            p = path_from_nodes(net, seq);
            validate_path(net, p, ps.size());
        } catch (const InvalidInput& e) {
            throw InvalidInput("line " + std::to_string(line_no) + ": " + e.what());
        }
        ps.push_back(std::move(p));
    }
    return ps;
}

inline void write_paths(std::ostream& out, const CreditNetwork& net, const PathSet& paths)
{
    for (const auto& p : paths) {
        out << p.source << ' ' << p.destination;
        for (NodeId n : path_nodes(net, p)) out << ' ' << n;
        out << '\n';
    }
}

inline CreditNetwork load_graph(const std::string& file)
{
    std::ifstream in(file);
    if (!in) throw InvalidInput("cannot open graph file '" + file + "'");
    return read_graph(in);
}

inline PathSet load_paths(const std::string& file, const CreditNetwork& net)
{
    std::ifstream in(file);
    if (!in) throw InvalidInput("cannot open path file '" + file + "'");
    return read_paths(in, net);
}

} // namespace creditnet

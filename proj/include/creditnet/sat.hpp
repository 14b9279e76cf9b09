#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "creditnet/network.hpp"

namespace creditnet {

// CNF over variables 1..variable_count; literal v > 0 is x_v, -v is its negation.
struct CnfFormula {
    std::size_t variable_count = 0;
    std::vector<std::vector<int>> clauses;

    void validate() const
    {
        for (std::size_t c = 0; c < clauses.size(); ++c) {
            if (clauses[c].empty()) throw InvalidInput("clause " + std::to_string(c) + " is empty");
            for (int l : clauses[c])
                if (l == 0 || static_cast<std::size_t>(std::abs(l)) > variable_count)
                    throw InvalidInput("clause " + std::to_string(c) + " has literal " + std::to_string(l) + " out of range");
        }
    }

    bool satisfied_by(const std::vector<bool>& value) const // value[v] for v in 1..n
    {
        for (const auto& c : clauses) {
            bool any = false;
            for (int l : c)
                if (value[static_cast<std::size_t>(std::abs(l))] == (l > 0)) {
                    any = true;
                    break;
                }
            if (!any) return false;
        }
        return true;
    }

    friend bool operator==(const CnfFormula&, const CnfFormula&) = default;
};

inline CnfFormula read_dimacs(std::istream& in)
{
    CnfFormula f;
    bool header = false;
    std::size_t declared = 0;
    std::vector<int> cur;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream ls(line);
        std::string first;
        if (!(ls >> first)) continue;
        if (first == "c" || first[0] == '%') continue;
        if (first == "p") {
            std::string fmt;
            long vars = -1, cls = -1;
            if (!(ls >> fmt >> vars >> cls) || fmt != "cnf" || vars < 0 || cls < 0)
                throw InvalidInput("line " + std::to_string(line_no) + ": bad DIMACS header");
            f.variable_count = static_cast<std::size_t>(vars);
            declared = static_cast<std::size_t>(cls);
            header = true;
            continue;
        }
        if (!header) throw InvalidInput("line " + std::to_string(line_no) + ": clause before 'p cnf' header");
        std::istringstream all(line);
        std::string tok;
        while (all >> tok) {
            char* end = nullptr;
            long v = std::strtol(tok.c_str(), &end, 10);
            if (*end != '\0') throw InvalidInput("line " + std::to_string(line_no) + ": bad literal '" + tok + "'");
            if (v == 0) {
                if (cur.empty()) throw InvalidInput("line " + std::to_string(line_no) + ": empty clause");
                f.clauses.push_back(cur);
                cur.clear();
            } else {
                cur.push_back(static_cast<int>(v));
            }
        }
    }
    if (!cur.empty()) f.clauses.push_back(cur);
    if (!header) throw InvalidInput("missing 'p cnf' header");
    if (f.clauses.size() != declared)
        throw InvalidInput("header declares " + std::to_string(declared) + " clauses, found " + std::to_string(f.clauses.size()));
    f.validate();
    return f;
}

inline CnfFormula load_dimacs(const std::string& file)
{
    std::ifstream in(file);
    if (!in) throw InvalidInput("cannot open CNF file '" + file + "'");
    return read_dimacs(in);
}

inline void write_dimacs(std::ostream& out, const CnfFormula& f)
{
    out << "p cnf " << f.variable_count << ' ' << f.clauses.size() << '\n';
    for (const auto& c : f.clauses) {
        for (int l : c) out << l << ' ';
        out << "0\n";
    }
}

// Exhaustive check over all 2^n assignments.
inline bool sat_bruteforce(const CnfFormula& f)
{
    f.validate();
    if (f.variable_count > 20) throw LimitExceeded("brute-force SAT limited to 20 variables");
    std::vector<bool> value(f.variable_count + 1);
    for (std::uint64_t m = 0; m < (std::uint64_t(1) << f.variable_count); ++m) {
        for (std::size_t v = 1; v <= f.variable_count; ++v) value[v] = (m >> (v - 1)) & 1;
        if (f.satisfied_by(value)) return true;
    }
    return false;
}

// A fresh variable sits between two adjacent literals of an ordered clause.
struct FreshVariable {
    int left;  // literal on x_i
    int right; // literal on x_j, |left| < |right|
    friend bool operator==(const FreshVariable&, const FreshVariable&) = default;
};

struct PreprocessedCnf {
    CnfFormula ordered;             // literals sorted by variable, duplicates and tautologies dropped
    CnfFormula expanded;            // fresh variables inserted, plus one (not y) clause each
    std::vector<FreshVariable> fresh; // fresh variable k is expanded variable ordered.variable_count + 1 + k
};

inline PreprocessedCnf preprocess_cnf(const CnfFormula& f)
{
    f.validate();
    PreprocessedCnf out;
    out.ordered.variable_count = f.variable_count;
    for (const auto& c : f.clauses) {
        std::vector<int> lits = c;
        std::sort(lits.begin(), lits.end(), [](int a, int b) { return std::make_pair(std::abs(a), a) < std::make_pair(std::abs(b), b); });
        lits.erase(std::unique(lits.begin(), lits.end()), lits.end());
        bool taut = false;
        for (std::size_t i = 1; i < lits.size(); ++i) taut = taut || std::abs(lits[i]) == std::abs(lits[i - 1]);
        if (!taut) out.ordered.clauses.push_back(std::move(lits));
    }
    std::map<std::pair<int, int>, int> index;
    std::size_t n = f.variable_count;
    std::vector<std::vector<int>> long_clauses;
    for (const auto& c : out.ordered.clauses) {
        std::vector<int> e{c[0]};
        for (std::size_t i = 1; i < c.size(); ++i) {
            auto key = std::make_pair(c[i - 1], c[i]);
            auto it = index.find(key);
            if (it == index.end()) {
                it = index.emplace(key, static_cast<int>(out.fresh.size())).first;
                out.fresh.push_back({c[i - 1], c[i]});
            }
            e.push_back(static_cast<int>(n) + 1 + it->second);
            e.push_back(c[i]);
        }
        long_clauses.push_back(std::move(e));
    }
    out.expanded.variable_count = n + out.fresh.size();
    out.expanded.clauses = std::move(long_clauses);
    for (std::size_t k = 0; k < out.fresh.size(); ++k) out.expanded.clauses.push_back({-static_cast<int>(n + 1 + k)});
    return out;
}

struct SatGadget {
    CreditNetwork net;
    PathSet paths; // one per ordered clause, then one dedicated flow per fresh variable
    PreprocessedCnf cnf;
    std::vector<std::size_t> variable_edge; // variable_edge[v - 1] for v in 1..n
    std::vector<std::size_t> fresh_edge;
};

// Variable x_v becomes the vertical edge between top node 2(v-1) and bottom
// node 2(v-1)+1. A clause path runs down a positive literal and up a negated
// one; the fresh edge for adjacent literals joins where the path leaves the
// first edge to where it enters the second, and carries a one-hop flow back.
inline SatGadget cnf_to_creditnet(const CnfFormula& f)
{
    if (f.clauses.empty()) throw InvalidInput("CNF has no clauses");
    PreprocessedCnf pre = preprocess_cnf(f);
    std::size_t n = f.variable_count;
    auto top = [](int lit) { return static_cast<NodeId>(2 * (std::abs(lit) - 1)); };
    auto entry = [&](int lit) { return lit > 0 ? top(lit) : top(lit) + 1; };
    auto exit = [&](int lit) { return lit > 0 ? top(lit) + 1 : top(lit); };
    std::vector<Edge> edges;
    for (std::size_t v = 1; v <= n; ++v) edges.push_back({static_cast<NodeId>(2 * (v - 1)), static_cast<NodeId>(2 * (v - 1) + 1)});
    for (const auto& y : pre.fresh) {
        NodeId a = exit(y.left), b = entry(y.right);
        edges.push_back({std::min(a, b), std::max(a, b)});
    }
    auto net = CreditNetwork::with_uniform_capacity(2 * n, edges, 1);
    std::vector<std::vector<NodeId>> seqs;
    for (const auto& c : pre.ordered.clauses) {
        std::vector<NodeId> seq;
        for (int l : c) {
            seq.push_back(entry(l));
            seq.push_back(exit(l));
        }
        seqs.push_back(std::move(seq));
    }
    for (const auto& y : pre.fresh) seqs.push_back({entry(y.right), exit(y.left)});
    SatGadget g{net, PathSet::from_node_sequences(net, seqs), std::move(pre), {}, {}};
    for (std::size_t v = 1; v <= n; ++v)
        g.variable_edge.push_back(*g.net.find_edge(static_cast<NodeId>(2 * (v - 1)), static_cast<NodeId>(2 * (v - 1) + 1)));
    for (const auto& y : g.cnf.fresh) g.fresh_edge.push_back(*g.net.find_edge(exit(y.left), entry(y.right)));
    return g;
}

// Reads a truth assignment off a full deadlock: x_v is true when the edge
// cannot carry flow downward (tokens at the bottom node).
template <class Assignment>
std::vector<bool> assignment_from_deadlock(const SatGadget& g, const Assignment& a)
{
    std::vector<bool> value(g.cnf.ordered.variable_count + 1, false);
    for (const auto& d : a.edges)
        for (std::size_t v = 0; v < g.variable_edge.size(); ++v)
            if (g.variable_edge[v] == d.edge) value[v + 1] = d.blocked == Direction::Forward;
    return value;
}

} // namespace creditnet

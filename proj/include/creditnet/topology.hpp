#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <unordered_set>
#include <vector>

#include "creditnet/io.hpp"
#include "creditnet/network.hpp"

namespace creditnet {

enum class TopologyKind { ErdosRenyi, RandomRegular, ScaleFreeBA, PowerLawConfig, SmallWorld, Star, Imported };

inline const char* topology_name(TopologyKind k)
{
    switch (k) {
    case TopologyKind::ErdosRenyi: return "er";
    case TopologyKind::RandomRegular: return "regular";
    case TopologyKind::ScaleFreeBA: return "ba";
    case TopologyKind::PowerLawConfig: return "powerlaw";
    case TopologyKind::SmallWorld: return "smallworld";
    case TopologyKind::Star: return "star";
    default: return "imported";
    }
}

inline TopologyKind parse_topology_kind(const std::string& s)
{
    for (auto k : {TopologyKind::ErdosRenyi, TopologyKind::RandomRegular, TopologyKind::ScaleFreeBA,
                   TopologyKind::PowerLawConfig, TopologyKind::SmallWorld, TopologyKind::Star, TopologyKind::Imported})
        if (s == topology_name(k)) return k;
    throw InvalidInput("unknown topology kind '" + s + "'");
}

struct TopologySpec {
    TopologyKind kind = TopologyKind::ErdosRenyi;
    std::size_t node_count = 100;
    std::size_t edge_budget = 400;  // ER, BA, power-law; also sets degree when degree == 0
    std::size_t degree = 0;         // random-regular degree, small-world lattice degree k
    double rewiring = 0.1;          // small-world only
    double exponent = 2.5;          // power-law only
    std::uint64_t seed = 1;
    Tokens total_collateral = 100000;
    std::string import_path;        // Imported only

    void validate() const
    {
        if (kind != TopologyKind::Imported && node_count < 2) throw InvalidInput("topology needs at least 2 nodes");
        if (total_collateral <= 0) throw InvalidInput("total collateral must be positive");
        std::size_t n = node_count;
        std::size_t max_edges = n * (n - 1) / 2;
        switch (kind) {
        case TopologyKind::ErdosRenyi:
        case TopologyKind::ScaleFreeBA:
        case TopologyKind::PowerLawConfig:
            if (edge_budget < n - 1) throw InvalidInput("edge budget below n-1 cannot give a connected graph");
            if (edge_budget > max_edges) throw InvalidInput("edge budget exceeds n(n-1)/2");
            if (kind == TopologyKind::ScaleFreeBA && n < 3) throw InvalidInput("BA graphs need at least 3 nodes");
            if (kind == TopologyKind::PowerLawConfig && !(exponent > 2.0))
                throw InvalidInput("power-law exponent must exceed 2");
            break;
        case TopologyKind::RandomRegular: {
            std::size_t d = effective_degree();
            if (d < 2 || d >= n) throw InvalidInput("regular degree must lie in [2, n-1]");
            if ((n * d) % 2 != 0) throw InvalidInput("n*d must be even for a regular graph");
            break;
        }
        case TopologyKind::SmallWorld: {
            std::size_t k = effective_degree();
            if (k < 2 || k % 2 != 0 || k >= n) throw InvalidInput("small-world degree must be even and in [2, n-1]");
            if (rewiring < 0 || rewiring > 1) throw InvalidInput("rewiring probability must be in [0,1]");
            break;
        }
        case TopologyKind::Imported:
            if (import_path.empty()) throw InvalidInput("imported topology needs a file path");
            break;
        default: break;
        }
    }

    std::size_t effective_degree() const
    {
        if (degree > 0) return degree;
        std::size_t d = static_cast<std::size_t>(std::llround(2.0 * static_cast<double>(edge_budget) /
                                                              static_cast<double>(node_count)));
        if (kind == TopologyKind::SmallWorld && d % 2 == 1) ++d;
        return d;
    }
};

namespace detail {

using EdgeSet = std::set<std::pair<NodeId, NodeId>>;

inline std::pair<NodeId, NodeId> ordered(NodeId a, NodeId b) { return a < b ? std::make_pair(a, b) : std::make_pair(b, a); }

template <class Rng>
std::size_t uniform_below(Rng& rng, std::size_t n)
{
    std::uniform_int_distribution<std::size_t> d(0, n - 1);
    return d(rng);
}

template <class Rng>
EdgeSet gen_er(std::size_t n, std::size_t m, Rng& rng)
{
    EdgeSet edges;
    std::size_t total = n * (n - 1) / 2;
    if (m * 2 > total) {
        std::vector<std::pair<NodeId, NodeId>> all;
        all.reserve(total);
        for (NodeId u = 0; u < n; ++u)
            for (NodeId v = u + 1; v < n; ++v) all.emplace_back(u, v);
        for (std::size_t i = 0; i < m; ++i) std::swap(all[i], all[i + uniform_below(rng, total - i)]);
        edges.insert(all.begin(), all.begin() + static_cast<long>(m));
        return edges;
    }
    while (edges.size() < m) {
        auto a = static_cast<NodeId>(uniform_below(rng, n));
        auto b = static_cast<NodeId>(uniform_below(rng, n));
        if (a != b) edges.insert(ordered(a, b));
    }
    return edges;
}

// Pairing model with restarts: shuffle the stub list, keep valid pairs, retry
// with the leftover stubs until none remain or no valid pair can be formed.
template <class Rng>
EdgeSet gen_regular(std::size_t n, std::size_t d, Rng& rng)
{
    for (int attempt = 0; attempt < 1000; ++attempt) {
        EdgeSet edges;
        std::vector<NodeId> stubs;
        for (NodeId v = 0; v < n; ++v)
            for (std::size_t j = 0; j < d; ++j) stubs.push_back(v);
        bool ok = true;
        while (!stubs.empty()) {
            std::shuffle(stubs.begin(), stubs.end(), rng);
            std::map<NodeId, std::size_t> leftover;
            for (std::size_t i = 0; i + 1 < stubs.size(); i += 2) {
                NodeId a = stubs[i], b = stubs[i + 1];
                if (a != b && !edges.count(ordered(a, b)))
                    edges.insert(ordered(a, b));
                else {
                    ++leftover[a];
                    ++leftover[b];
                }
            }
            if (leftover.empty()) break;
            bool suitable = false;
            for (auto i = leftover.begin(); i != leftover.end() && !suitable; ++i)
                for (auto j = std::next(i); j != leftover.end() && !suitable; ++j)
                    if (!edges.count(ordered(i->first, j->first))) suitable = true;
            if (!suitable) {
                ok = false;
                break;
            }
            stubs.clear();
            for (const auto& [v, c] : leftover)
                for (std::size_t j = 0; j < c; ++j) stubs.push_back(v);
        }
        if (ok) return edges;
    }
    throw LimitExceeded("random regular generation did not converge");
}

// Preferential attachment seeded by a star on m + 1 nodes. Each new node
// attaches m or m + 1 edges so the total lands on the budget.
template <class Rng>
EdgeSet gen_ba(std::size_t n, std::size_t budget, Rng& rng)
{
    std::size_t m = std::max<std::size_t>(1, budget / n);
    if (m + 1 >= n) m = n - 2;
    EdgeSet edges;
    std::vector<NodeId> repeated;
    for (NodeId v = 1; v <= m; ++v) {
        edges.insert({0, v});
        repeated.push_back(0);
        repeated.push_back(v);
    }
    std::size_t arrivals = n - m - 1;
    std::size_t base = m + m * arrivals;
    std::size_t extra = budget > base ? std::min(budget - base, arrivals) : 0;
    for (std::size_t i = 0; i < arrivals; ++i) {
        auto v = static_cast<NodeId>(m + 1 + i);
        std::size_t want = m + (((i + 1) * extra / arrivals) > (i * extra / arrivals) ? 1 : 0);
        want = std::min<std::size_t>(want, v);
        std::set<NodeId> targets;
        while (targets.size() < want) targets.insert(repeated[uniform_below(rng, repeated.size())]);
        for (NodeId t : targets) {
            edges.insert(ordered(t, v));
            repeated.push_back(t);
            repeated.push_back(v);
        }
    }
    return edges;
}

// Configuration model on a Pareto degree sequence scaled to the edge budget,
// then degree-preserving swaps to remove self-loops and multi-edges.
template <class Rng>
EdgeSet gen_powerlaw(std::size_t n, std::size_t budget, double exponent, Rng& rng)
{
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<double> w(n);
    for (auto& x : w) x = std::pow(1.0 - unif(rng), -1.0 / (exponent - 1.0));
    double sum = std::accumulate(w.begin(), w.end(), 0.0);
    std::vector<long> deg(n);
    long target = static_cast<long>(2 * budget);
    for (std::size_t i = 0; i < n; ++i)
        deg[i] = std::clamp<long>(std::lround(w[i] * static_cast<double>(target) / sum), 1, static_cast<long>(n - 1));
    long total = std::accumulate(deg.begin(), deg.end(), 0L);
    for (int guard = 0; total != target && guard < 10000000; ++guard) {
        std::size_t i = uniform_below(rng, n);
        if (total < target && deg[i] < static_cast<long>(n - 1)) {
            ++deg[i];
            ++total;
        } else if (total > target && deg[i] > 1) {
            --deg[i];
            --total;
        }
    }
    std::vector<NodeId> stubs;
    for (NodeId v = 0; v < n; ++v)
        for (long j = 0; j < deg[v]; ++j) stubs.push_back(v);
    std::shuffle(stubs.begin(), stubs.end(), rng);
    std::vector<std::pair<NodeId, NodeId>> list;
    for (std::size_t i = 0; i + 1 < stubs.size(); i += 2) list.push_back(ordered(stubs[i], stubs[i + 1]));
    std::map<std::pair<NodeId, NodeId>, int> mult;
    for (const auto& e : list) ++mult[e];
    auto is_bad = [&](const std::pair<NodeId, NodeId>& e) { return e.first == e.second || mult[e] > 1; };
    for (int round = 0; round < 200; ++round) {
        bool any = false;
        for (std::size_t i = 0; i < list.size(); ++i) {
            if (!is_bad(list[i])) continue;
            any = true;
            for (int tries = 0; tries < 50; ++tries) {
                std::size_t j = uniform_below(rng, list.size());
                if (j == i) continue;
                auto [a, b] = list[i];
                auto [c, d] = list[j];
                if (unif(rng) < 0.5) std::swap(c, d);
                auto e1 = ordered(a, c), e2 = ordered(b, d);
                if (e1.first == e1.second || e2.first == e2.second || e1 == e2) continue;
                if (mult.count(e1) && mult[e1] > 0) continue;
                if (mult.count(e2) && mult[e2] > 0) continue;
                --mult[list[i]];
                --mult[list[j]];
                list[i] = e1;
                list[j] = e2;
                ++mult[e1];
                ++mult[e2];
                break;
            }
        }
        if (!any) break;
    }
    EdgeSet edges;
    for (const auto& e : list)
        if (e.first != e.second) edges.insert(e);
    return edges;
}

template <class Rng>
EdgeSet gen_small_world(std::size_t n, std::size_t k, double p, Rng& rng)
{
    EdgeSet edges;
    for (NodeId u = 0; u < n; ++u)
        for (std::size_t j = 1; j <= k / 2; ++j) edges.insert(ordered(u, static_cast<NodeId>((u + j) % n)));
    if (p <= 0) return edges;
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (std::size_t j = 1; j <= k / 2; ++j)
        for (NodeId u = 0; u < n; ++u) {
            auto v = static_cast<NodeId>((u + j) % n);
            if (unif(rng) >= p) continue;
            if (!edges.count(ordered(u, v))) continue;
            auto w = static_cast<NodeId>(uniform_below(rng, n));
            std::size_t deg_u = 0;
            for (const auto& e : edges)
                if (e.first == u || e.second == u) ++deg_u;
            if (deg_u >= n - 1) continue;
            while (w == u || edges.count(ordered(u, w))) w = static_cast<NodeId>(uniform_below(rng, n));
            edges.erase(ordered(u, v));
            edges.insert(ordered(u, w));
        }
    return edges;
}

inline CreditNetwork with_collateral(std::size_t n, const EdgeSet& es, const Tokens& total)
{
    std::vector<Edge> edges;
    edges.reserve(es.size());
    for (const auto& [a, b] : es) edges.push_back({a, b});
    Tokens cap = es.empty() ? Tokens(0) : Tokens(total / static_cast<long>(es.size()));
    return CreditNetwork::with_uniform_capacity(n, std::move(edges), cap);
}

// Induced subgraph on `keep`, relabelled by ascending original id.
inline CreditNetwork induced_subgraph(const CreditNetwork& net, std::vector<NodeId> keep)
{
    std::sort(keep.begin(), keep.end());
    std::vector<long> index(net.node_count(), -1);
    for (std::size_t i = 0; i < keep.size(); ++i) index[keep[i]] = static_cast<long>(i);
    std::vector<Edge> edges;
    std::vector<Tokens> caps;
    for (std::size_t k = 0; k < net.edge_count(); ++k) {
        const auto& e = net.edge(k);
        if (index[e.u] >= 0 && index[e.v] >= 0) {
            edges.push_back({static_cast<NodeId>(index[e.u]), static_cast<NodeId>(index[e.v])});
            caps.push_back(net.capacity(k));
        }
    }
    return CreditNetwork(keep.size(), std::move(edges), std::move(caps));
}

inline std::vector<NodeId> component_of(const CreditNetwork& net, NodeId root)
{
    std::vector<char> seen(net.node_count(), 0);
    std::vector<NodeId> out{root}, stack{root};
    seen[root] = 1;
    while (!stack.empty()) {
        NodeId x = stack.back();
        stack.pop_back();
        for (const auto& nb : net.neighbors(x))
            if (!seen[nb.node]) {
                seen[nb.node] = 1;
                out.push_back(nb.node);
                stack.push_back(nb.node);
            }
    }
    return out;
}

} // namespace detail

inline CreditNetwork largest_component(const CreditNetwork& net)
{
    std::vector<char> seen(net.node_count(), 0);
    std::vector<NodeId> best;
    for (NodeId v = 0; v < net.node_count(); ++v) {
        if (seen[v]) continue;
        auto comp = detail::component_of(net, v);
        for (NodeId x : comp) seen[x] = 1;
        if (comp.size() > best.size()) best = std::move(comp);
    }
    return detail::induced_subgraph(net, best);
}

// Generates a connected graph; a disconnected draw is regenerated with the
// seed incremented, at most 100 times.
inline CreditNetwork gen_topology(const TopologySpec& spec)
{
    spec.validate();
    if (spec.kind == TopologyKind::Imported) {
        auto raw = largest_component(load_graph(spec.import_path));
        detail::EdgeSet es;
        for (const auto& e : raw.edges()) es.insert({e.u, e.v});
        return detail::with_collateral(raw.node_count(), es, spec.total_collateral);
    }
    std::size_t n = spec.node_count;
    for (std::uint64_t attempt = 0; attempt < 100; ++attempt) {
        std::mt19937_64 rng(spec.seed + attempt);
        detail::EdgeSet es;
        switch (spec.kind) {
        case TopologyKind::ErdosRenyi: es = detail::gen_er(n, spec.edge_budget, rng); break;
        case TopologyKind::RandomRegular: es = detail::gen_regular(n, spec.effective_degree(), rng); break;
        case TopologyKind::ScaleFreeBA: es = detail::gen_ba(n, spec.edge_budget, rng); break;
        case TopologyKind::PowerLawConfig: es = detail::gen_powerlaw(n, spec.edge_budget, spec.exponent, rng); break;
        case TopologyKind::SmallWorld:
            es = detail::gen_small_world(n, spec.effective_degree(), spec.rewiring, rng);
            break;
        case TopologyKind::Star:
            for (NodeId v = 1; v < n; ++v) es.insert({0, v});
            break;
        default: break;
        }
        auto net = detail::with_collateral(n, es, spec.total_collateral);
        if (net.connected()) return net;
    }
    throw LimitExceeded("no connected graph after 100 seeds");
}

// BFS-frontier sample: random root, neighbours visited in shuffled order, one
// node at a time until `target_nodes` are in; returns the induced subgraph.
inline CreditNetwork snowball_sample(const CreditNetwork& net, std::size_t target_nodes, std::uint64_t seed)
{
    if (target_nodes > net.node_count()) throw InvalidInput("snowball target exceeds node count");
    if (target_nodes == 0) return CreditNetwork(0, {}, {});
    std::mt19937_64 rng(seed);
    auto root = static_cast<NodeId>(detail::uniform_below(rng, net.node_count()));
    std::vector<char> in(net.node_count(), 0);
    std::vector<NodeId> keep{root};
    in[root] = 1;
    for (std::size_t head = 0; head < keep.size() && keep.size() < target_nodes; ++head) {
        std::vector<NodeId> nbrs;
        for (const auto& nb : net.neighbors(keep[head]))
            if (!in[nb.node]) nbrs.push_back(nb.node);
        std::shuffle(nbrs.begin(), nbrs.end(), rng);
        for (NodeId x : nbrs) {
            if (keep.size() >= target_nodes) break;
            in[x] = 1;
            keep.push_back(x);
        }
    }
    return detail::induced_subgraph(net, keep);
}

// Grows a BFS sample until adding the next node would push the induced edge
// count past `max_edges`; used to cut small instances out of larger graphs.
inline CreditNetwork snowball_sample_edges(const CreditNetwork& net, std::size_t max_edges, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    auto root = static_cast<NodeId>(detail::uniform_below(rng, net.node_count()));
    std::vector<char> in(net.node_count(), 0);
    std::vector<NodeId> keep{root};
    in[root] = 1;
    std::size_t edges = 0;
    for (std::size_t head = 0; head < keep.size(); ++head) {
        std::vector<NodeId> nbrs;
        for (const auto& nb : net.neighbors(keep[head]))
            if (!in[nb.node]) nbrs.push_back(nb.node);
        std::shuffle(nbrs.begin(), nbrs.end(), rng);
        for (NodeId x : nbrs) {
            if (in[x]) continue;
            std::size_t added = 0;
            for (const auto& nb : net.neighbors(x))
                if (in[nb.node]) ++added;
            if (edges + added > max_edges) continue;
            in[x] = 1;
            keep.push_back(x);
            edges += added;
        }
    }
    return detail::induced_subgraph(net, keep);
}

} // namespace creditnet

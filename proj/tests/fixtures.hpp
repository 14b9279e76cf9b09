#pragma once

// Small hand-built instances shared by the unit and acceptance tests.

#include <vector>

#include "creditnet/network.hpp"

namespace fixtures {

using namespace creditnet;

struct Instance {
    CreditNetwork net;
    PathSet paths;
};

// Three nodes on a line, capacity 20 per channel, flows 0->2, 2->0, 1->2, 1->0.
inline Instance table1_line(Tokens cap = 20)
{
    auto net = CreditNetwork::with_uniform_capacity(3, {{0, 1}, {1, 2}}, cap);
    auto paths = PathSet::from_node_sequences(net, {{0, 1, 2}, {2, 1, 0}, {1, 2}, {1, 0}});
    return {net, paths};
}

// Line A-B-C-D (ids 0..3) with three length-1 flows and two longer ones; peels
// completely in six rounds.
inline Instance peelable_line()
{
    auto net = CreditNetwork::with_uniform_capacity(4, {{0, 1}, {1, 2}, {2, 3}}, 10);
    auto paths = PathSet::from_node_sequences(net, {{1, 0}, {2, 1}, {2, 3}, {0, 1, 2}, {3, 2, 1, 0}});
    return {net, paths};
}

// Triangle carrying all six two-hop flows: nothing peels, yet no deadlock exists.
inline Instance unpeelable_triangle()
{
    auto net = CreditNetwork::with_uniform_capacity(3, {{0, 1}, {0, 2}, {1, 2}}, 10);
    auto paths = PathSet::from_node_sequences(net, {{0, 1, 2}, {2, 1, 0}, {1, 2, 0}, {0, 2, 1}, {2, 0, 1}, {1, 0, 2}});
    return {net, paths};
}

} // namespace fixtures

#include <random>

namespace fixtures {

// Random connected graph (spanning tree plus extra edges) carrying random
// simple paths built by self-avoiding walks. Capacities are even integers.
inline Instance random_instance(std::uint64_t seed, std::size_t n, std::size_t extra_edges, std::size_t path_count,
                                std::size_t max_len = 4, int max_cap_half = 5)
{
    std::mt19937_64 rng(seed);
    std::vector<Edge> edges;
    for (NodeId v = 1; v < n; ++v) {
        std::uniform_int_distribution<NodeId> pick(0, v - 1);
        edges.push_back({pick(rng), v});
    }
    std::uniform_int_distribution<NodeId> any(0, static_cast<NodeId>(n - 1));
    for (std::size_t tries = 0; extra_edges > 0 && tries < 1000; ++tries) {
        NodeId a = any(rng), b = any(rng);
        if (a == b) continue;
        Edge e{std::min(a, b), std::max(a, b)};
        if (std::find(edges.begin(), edges.end(), e) != edges.end()) continue;
        edges.push_back(e);
        --extra_edges;
    }
    std::uniform_int_distribution<int> cap(1, max_cap_half);
    std::vector<Tokens> caps;
    for (std::size_t i = 0; i < edges.size(); ++i) caps.emplace_back(2 * cap(rng));
    CreditNetwork net(n, edges, caps);
    PathSet paths;
    std::uniform_int_distribution<std::size_t> len(1, max_len);
    while (paths.size() < path_count) {
        std::vector<NodeId> walk{any(rng)};
        std::size_t want = len(rng);
        while (walk.size() <= want) {
            std::vector<NodeId> options;
            for (const auto& nb : net.neighbors(walk.back()))
                if (std::find(walk.begin(), walk.end(), nb.node) == walk.end()) options.push_back(nb.node);
            if (options.empty()) break;
            std::uniform_int_distribution<std::size_t> o(0, options.size() - 1);
            walk.push_back(options[o(rng)]);
        }
        if (walk.size() >= 2) paths.push_back(path_from_nodes(net, walk));
    }
    return {net, paths};
}

} // namespace fixtures

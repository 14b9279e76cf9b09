#pragma once

#include <vector>

#include "creditnet/network.hpp"

namespace creditnet {

// A deadlocked edge and the end that holds zero balance. `blocked` is the
// direction that cannot send (Forward: b = 0, Backward: b = C).
struct DeadlockedEdge {
    std::size_t edge;
    Direction blocked;
    friend bool operator==(const DeadlockedEdge&, const DeadlockedEdge&) = default;
};

struct DeadlockAssignment {
    std::vector<DeadlockedEdge> edges; // sorted by edge index
    BalanceState witness;              // deadlocked edges imbalanced, others at C/2

    std::size_t size() const noexcept { return edges.size(); }

    std::vector<std::size_t> edge_set() const
    {
        std::vector<std::size_t> out;
        out.reserve(edges.size());
        for (const auto& e : edges) out.push_back(e.edge);
        return out;
    }
};

inline BalanceState deadlock_witness(const CreditNetwork& net, const std::vector<DeadlockedEdge>& edges)
{
    std::vector<Tokens> b;
    b.reserve(net.edge_count());
    for (const auto& c : net.capacities()) b.push_back(c / 2);
    for (const auto& d : edges) b.at(d.edge) = d.blocked == Direction::Forward ? Tokens(0) : net.capacity(d.edge);
    return BalanceState(std::move(b));
}

} // namespace creditnet

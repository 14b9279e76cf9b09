#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "creditnet/error.hpp"
#include "creditnet/tokens.hpp"

namespace creditnet {

using NodeId = std::uint32_t;

// Forward = from the lower-id endpoint to the higher-id one (red in the peeling
// picture), Backward = the reverse (blue).
enum class Direction : std::uint8_t { Forward = 0, Backward = 1 };

constexpr Direction opposite(Direction d) noexcept
{
    return d == Direction::Forward ? Direction::Backward : Direction::Forward;
}

inline const char* direction_name(Direction d) { return d == Direction::Forward ? "forward" : "backward"; }

struct Edge {
    NodeId u = 0;
    NodeId v = 0;
    friend bool operator==(const Edge&, const Edge&) = default;
    friend auto operator<=>(const Edge&, const Edge&) = default;
};

struct Hop {
    std::size_t edge = 0;
    Direction dir = Direction::Forward;
    friend bool operator==(const Hop&, const Hop&) = default;
};

struct Neighbor {
    NodeId node;
    std::size_t edge;
};

class CreditNetwork {
public:
    CreditNetwork() = default;

    // Edges may come in any order and orientation; they are canonicalized to
    // u < v and sorted by (u, v), capacities follow their edge.
    CreditNetwork(std::size_t node_count, std::vector<Edge> edges, std::vector<Tokens> capacities)
        : node_count_(node_count)
    {
        if (edges.size() != capacities.size())
            throw InvalidInput("edge and capacity counts differ");
        std::vector<std::pair<Edge, Tokens>> items;
        items.reserve(edges.size());
        for (std::size_t i = 0; i < edges.size(); ++i) {
            Edge e = edges[i];
            if (e.u == e.v) throw InvalidInput("self-loop at node " + std::to_string(e.u));
            if (e.u >= node_count || e.v >= node_count)
                throw InvalidInput("edge (" + std::to_string(e.u) + "," + std::to_string(e.v) + ") has a node id outside [0, " +
                                   std::to_string(node_count) + ")");
            if (capacities[i] <= 0)
                throw InvalidInput("edge (" + std::to_string(e.u) + "," + std::to_string(e.v) + ") has non-positive capacity");
            if (e.u > e.v) std::swap(e.u, e.v);
            items.emplace_back(e, std::move(capacities[i]));
        }
        std::sort(items.begin(), items.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
        for (std::size_t i = 1; i < items.size(); ++i)
            if (items[i].first == items[i - 1].first)
                throw InvalidInput("duplicate edge (" + std::to_string(items[i].first.u) + "," +
                                   std::to_string(items[i].first.v) + ")");
        edges_.reserve(items.size());
        capacities_.reserve(items.size());
        for (auto& [e, c] : items) {
            edges_.push_back(e);
            capacities_.push_back(std::move(c));
        }
        adjacency_.assign(node_count, {});
        for (std::size_t k = 0; k < edges_.size(); ++k) {
            adjacency_[edges_[k].u].push_back({edges_[k].v, k});
            adjacency_[edges_[k].v].push_back({edges_[k].u, k});
        }
        for (auto& adj : adjacency_)
            std::sort(adj.begin(), adj.end(), [](const Neighbor& a, const Neighbor& b) { return a.node < b.node; });
    }

    static CreditNetwork with_uniform_capacity(std::size_t node_count, std::vector<Edge> edges, const Tokens& capacity)
    {
        std::vector<Tokens> caps(edges.size(), capacity);
        return CreditNetwork(node_count, std::move(edges), std::move(caps));
    }

    std::size_t node_count() const noexcept { return node_count_; }
    std::size_t edge_count() const noexcept { return edges_.size(); }
    const std::vector<Edge>& edges() const noexcept { return edges_; }
    const Edge& edge(std::size_t k) const { return edges_.at(k); }
    const std::vector<Tokens>& capacities() const noexcept { return capacities_; }
    const Tokens& capacity(std::size_t k) const { return capacities_.at(k); }
    const std::vector<Neighbor>& neighbors(NodeId n) const { return adjacency_.at(n); }
    std::size_t degree(NodeId n) const { return adjacency_.at(n).size(); }

    std::optional<std::size_t> find_edge(NodeId a, NodeId b) const
    {
        if (a > b) std::swap(a, b);
        Edge key{a, b};
        auto it = std::lower_bound(edges_.begin(), edges_.end(), key);
        if (it == edges_.end() || *it != key) return std::nullopt;
        return static_cast<std::size_t>(it - edges_.begin());
    }

    NodeId tail(const Hop& h) const { return h.dir == Direction::Forward ? edges_.at(h.edge).u : edges_.at(h.edge).v; }
    NodeId head(const Hop& h) const { return h.dir == Direction::Forward ? edges_.at(h.edge).v : edges_.at(h.edge).u; }

    Tokens total_capacity() const
    {
        Tokens s = 0;
        for (const auto& c : capacities_) s += c;
        return s;
    }

    Tokens min_capacity() const
    {
        if (capacities_.empty()) return 0;
        return *std::min_element(capacities_.begin(), capacities_.end());
    }

    bool connected() const
    {
        if (node_count_ <= 1) return true;
        std::vector<char> seen(node_count_, 0);
        std::vector<NodeId> stack{0};
        seen[0] = 1;
        std::size_t count = 1;
        while (!stack.empty()) {
            NodeId x = stack.back();
            stack.pop_back();
            for (const auto& nb : adjacency_[x])
                if (!seen[nb.node]) {
                    seen[nb.node] = 1;
                    ++count;
                    stack.push_back(nb.node);
                }
        }
        return count == node_count_;
    }

    friend bool operator==(const CreditNetwork& a, const CreditNetwork& b)
    {
        return a.node_count_ == b.node_count_ && a.edges_ == b.edges_ && a.capacities_ == b.capacities_;
    }

private:
    std::size_t node_count_ = 0;
    std::vector<Edge> edges_;
    std::vector<Tokens> capacities_;
    std::vector<std::vector<Neighbor>> adjacency_;
};

struct Path {
    NodeId source = 0;
    NodeId destination = 0;
    std::vector<Hop> hops;

    std::size_t length() const noexcept { return hops.size(); }
    friend bool operator==(const Path&, const Path&) = default;
};

inline void validate_path(const CreditNetwork& net, const Path& p, std::size_t index)
{
    auto bad = [&](const std::string& why) { throw InvalidInput("path " + std::to_string(index) + ": " + why); };
    if (p.hops.empty()) bad("no hops");
    std::vector<std::size_t> used;
    used.reserve(p.hops.size());
    NodeId at = p.source;
    for (const auto& h : p.hops) {
        if (h.edge >= net.edge_count()) bad("edge index " + std::to_string(h.edge) + " out of range");
        if (net.tail(h) != at) bad("hops are not contiguous");
        at = net.head(h);
        used.push_back(h.edge);
    }
    if (at != p.destination) bad("last hop does not end at the destination");
    std::sort(used.begin(), used.end());
    if (std::adjacent_find(used.begin(), used.end()) != used.end()) bad("uses an edge twice");
}

// Builds a path from a node sequence n0 n1 ... nk.
inline Path path_from_nodes(const CreditNetwork& net, std::span<const NodeId> nodes)
{
    if (nodes.size() < 2) throw InvalidInput("a path needs at least two nodes");
    Path p;
    p.source = nodes.front();
    p.destination = nodes.back();
    for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
        auto k = net.find_edge(nodes[i], nodes[i + 1]);
        if (!k)
            throw InvalidInput("no edge between " + std::to_string(nodes[i]) + " and " + std::to_string(nodes[i + 1]));
        p.hops.push_back({*k, nodes[i] < nodes[i + 1] ? Direction::Forward : Direction::Backward});
    }
    return p;
}

inline std::vector<NodeId> path_nodes(const CreditNetwork& net, const Path& p)
{
    std::vector<NodeId> out{p.source};
    for (const auto& h : p.hops) out.push_back(net.head(h));
    return out;
}

class PathSet {
public:
    PathSet() = default;
    explicit PathSet(std::vector<Path> paths) : paths_(std::move(paths)) {}

    static PathSet from_node_sequences(const CreditNetwork& net, const std::vector<std::vector<NodeId>>& seqs)
    {
        PathSet ps;
        for (const auto& s : seqs) ps.push_back(path_from_nodes(net, s));
        return ps;
    }

    void push_back(Path p) { paths_.push_back(std::move(p)); }
    std::size_t size() const noexcept { return paths_.size(); }
    bool empty() const noexcept { return paths_.empty(); }
    const Path& operator[](std::size_t i) const { return paths_[i]; }
    const Path& at(std::size_t i) const { return paths_.at(i); }
    auto begin() const { return paths_.begin(); }
    auto end() const { return paths_.end(); }
    const std::vector<Path>& paths() const noexcept { return paths_; }

    void validate(const CreditNetwork& net) const
    {
        for (std::size_t i = 0; i < paths_.size(); ++i) validate_path(net, paths_[i], i);
    }

    // Histogram of path lengths, index d = number of hops.
    std::vector<std::size_t> length_histogram() const
    {
        std::vector<std::size_t> h;
        for (const auto& p : paths_) {
            if (h.size() <= p.length()) h.resize(p.length() + 1, 0);
            ++h[p.length()];
        }
        return h;
    }

    friend bool operator==(const PathSet&, const PathSet&) = default;

private:
    std::vector<Path> paths_;
};

// Sparse storage of the forward/backward routing matrices. sign = +1 when the
// path uses the edge forward, -1 when backward; delta(k, p) is exactly sign.
struct RoutingEntry {
    std::size_t index;
    int sign;
};

class RoutingSystem {
public:
    RoutingSystem() = default;
    RoutingSystem(std::size_t edge_count, std::vector<std::vector<RoutingEntry>> columns)
        : edge_count_(edge_count), columns_(std::move(columns)), rows_(edge_count)
    {
        for (std::size_t p = 0; p < columns_.size(); ++p)
            for (const auto& e : columns_[p]) rows_.at(e.index).push_back({p, e.sign});
    }

    std::size_t edge_count() const noexcept { return edge_count_; }
    std::size_t path_count() const noexcept { return columns_.size(); }

    // Entries (edge, sign) of path p.
    const std::vector<RoutingEntry>& column(std::size_t p) const { return columns_.at(p); }
    // Entries (path, sign) of edge k.
    const std::vector<RoutingEntry>& row(std::size_t k) const { return rows_.at(k); }

    int delta(std::size_t k, std::size_t p) const
    {
        for (const auto& e : columns_.at(p))
            if (e.index == k) return e.sign;
        return 0;
    }
    int forward(std::size_t k, std::size_t p) const { return delta(k, p) > 0 ? 1 : 0; }
    int backward(std::size_t k, std::size_t p) const { return delta(k, p) < 0 ? 1 : 0; }

    std::vector<std::vector<int>> dense_forward() const { return dense([](int s) { return s > 0 ? 1 : 0; }); }
    std::vector<std::vector<int>> dense_backward() const { return dense([](int s) { return s < 0 ? 1 : 0; }); }
    std::vector<std::vector<int>> dense_delta() const { return dense([](int s) { return s; }); }

private:
    template <class F>
    std::vector<std::vector<int>> dense(F f) const
    {
        std::vector<std::vector<int>> m(edge_count_, std::vector<int>(columns_.size(), 0));
        for (std::size_t p = 0; p < columns_.size(); ++p)
            for (const auto& e : columns_[p]) m[e.index][p] = f(e.sign);
        return m;
    }

    std::size_t edge_count_ = 0;
    std::vector<std::vector<RoutingEntry>> columns_;
    std::vector<std::vector<RoutingEntry>> rows_;
};

inline RoutingSystem build_routing_system(const CreditNetwork& net, const PathSet& paths)
{
    paths.validate(net);
    std::vector<std::vector<RoutingEntry>> cols;
    cols.reserve(paths.size());
    for (const auto& p : paths) {
        std::vector<RoutingEntry> col;
        for (const auto& h : p.hops) col.push_back({h.edge, h.dir == Direction::Forward ? 1 : -1});
        std::sort(col.begin(), col.end(), [](const RoutingEntry& a, const RoutingEntry& b) { return a.index < b.index; });
        cols.push_back(std::move(col));
    }
    return RoutingSystem(net.edge_count(), std::move(cols));
}

// Balance at the lower-id endpoint of each canonical edge.
class BalanceState {
public:
    BalanceState() = default;
    explicit BalanceState(std::vector<Tokens> balances) : balances_(std::move(balances)) {}

    static BalanceState center(const CreditNetwork& net)
    {
        std::vector<Tokens> b;
        b.reserve(net.edge_count());
        for (const auto& c : net.capacities()) b.push_back(c / 2);
        return BalanceState(std::move(b));
    }

    std::size_t size() const noexcept { return balances_.size(); }
    const Tokens& operator[](std::size_t k) const { return balances_[k]; }
    const std::vector<Tokens>& values() const noexcept { return balances_; }

    Tokens reverse(const CreditNetwork& net, std::size_t k) const { return net.capacity(k) - balances_.at(k); }

    // Balance available for sending in direction d.
    Tokens available(const CreditNetwork& net, std::size_t k, Direction d) const
    {
        return d == Direction::Forward ? balances_.at(k) : reverse(net, k);
    }

    bool in_polytope(const CreditNetwork& net) const
    {
        if (balances_.size() != net.edge_count()) return false;
        for (std::size_t k = 0; k < balances_.size(); ++k)
            if (balances_[k] < 0 || balances_[k] > net.capacity(k)) return false;
        return true;
    }

    void validate(const CreditNetwork& net) const
    {
        if (balances_.size() != net.edge_count())
            throw InvalidInput("balance vector has " + std::to_string(balances_.size()) + " entries, network has " +
                               std::to_string(net.edge_count()) + " edges");
        for (std::size_t k = 0; k < balances_.size(); ++k)
            if (balances_[k] < 0 || balances_[k] > net.capacity(k))
                throw InvalidInput("balance of edge " + std::to_string(k) + " outside [0, capacity]");
    }

    std::vector<double> as_double() const
    {
        std::vector<double> out;
        out.reserve(balances_.size());
        for (const auto& b : balances_) out.push_back(to_double(b));
        return out;
    }

    friend bool operator==(const BalanceState&, const BalanceState&) = default;

private:
    std::vector<Tokens> balances_;
};

class FlowVector {
public:
    FlowVector() = default;
    explicit FlowVector(std::vector<Tokens> amounts) : amounts_(std::move(amounts))
    {
        for (std::size_t i = 0; i < amounts_.size(); ++i)
            if (amounts_[i] < 0) throw InvalidInput("flow on path " + std::to_string(i) + " is negative");
    }
    static FlowVector zero(std::size_t paths) { return FlowVector(std::vector<Tokens>(paths, Tokens(0))); }

    std::size_t size() const noexcept { return amounts_.size(); }
    const Tokens& operator[](std::size_t i) const { return amounts_[i]; }
    const std::vector<Tokens>& values() const noexcept { return amounts_; }

    Tokens total() const
    {
        Tokens s = 0;
        for (const auto& a : amounts_) s += a;
        return s;
    }

    friend FlowVector operator+(const FlowVector& a, const FlowVector& b)
    {
        if (a.size() != b.size()) throw InvalidInput("flow vectors differ in length");
        std::vector<Tokens> s(a.size());
        for (std::size_t i = 0; i < a.size(); ++i) s[i] = a[i] + b[i];
        return FlowVector(std::move(s));
    }

    friend bool operator==(const FlowVector&, const FlowVector&) = default;

private:
    std::vector<Tokens> amounts_;
};

namespace detail {

inline void check_dims(const CreditNetwork& net, const RoutingSystem& r, std::size_t balances, std::size_t flows)
{
    if (r.edge_count() != net.edge_count() || balances != net.edge_count())
        throw InvalidInput("balance/routing dimension does not match the edge count");
    if (flows != r.path_count()) throw InvalidInput("flow vector length does not match the path count");
}

struct Violation {
    std::size_t edge;
    Direction dir;
};

// Forward and backward load per edge for flow f.
template <class T>
void edge_loads(const RoutingSystem& r, std::span<const T> f, std::vector<T>& fwd, std::vector<T>& bwd)
{
    fwd.assign(r.edge_count(), T(0));
    bwd.assign(r.edge_count(), T(0));
    for (std::size_t p = 0; p < r.path_count(); ++p) {
        if (f[p] == T(0)) continue;
        for (const auto& e : r.column(p)) (e.sign > 0 ? fwd : bwd)[e.index] += f[p];
    }
}

inline std::optional<Violation> first_violation(const CreditNetwork& net, const RoutingSystem& r, const BalanceState& b,
                                                const FlowVector& f)
{
    std::vector<Tokens> fwd, bwd;
    edge_loads<Tokens>(r, std::span<const Tokens>(f.values()), fwd, bwd);
    for (std::size_t k = 0; k < net.edge_count(); ++k) {
        if (fwd[k] > b[k]) return Violation{k, Direction::Forward};
        if (bwd[k] > net.capacity(k) - b[k]) return Violation{k, Direction::Backward};
    }
    return std::nullopt;
}

} // namespace detail

// Exact feasibility: f >= 0, forward.f <= b, backward.f <= C - b.
inline bool check_feasible(const CreditNetwork& net, const RoutingSystem& r, const BalanceState& b, const FlowVector& f)
{
    detail::check_dims(net, r, b.size(), f.size());
    for (const auto& a : f.values())
        if (a < 0) return false;
    return !detail::first_violation(net, r, b, f).has_value();
}

// Tolerance version for LP-produced flows.
inline bool check_feasible(const CreditNetwork& net, const RoutingSystem& r, const BalanceState& b,
                           std::span<const double> f, double tol = 1e-9)
{
    detail::check_dims(net, r, b.size(), f.size());
    for (double a : f)
        if (a < -tol) return false;
    std::vector<double> fwd, bwd;
    detail::edge_loads<double>(r, f, fwd, bwd);
    for (std::size_t k = 0; k < net.edge_count(); ++k) {
        double bk = to_double(b[k]);
        double ck = to_double(net.capacity(k));
        if (fwd[k] > bk + tol || bwd[k] > ck - bk + tol) return false;
    }
    return true;
}

class InfeasibleFlow : public InvalidInput {
public:
    InfeasibleFlow(std::size_t edge, Direction dir)
        : InvalidInput("infeasible flow: edge " + std::to_string(edge) + " " + direction_name(dir) +
                       " direction lacks balance"),
          edge_(edge), dir_(dir)
    {}
    std::size_t edge() const noexcept { return edge_; }
    Direction direction() const noexcept { return dir_; }

private:
    std::size_t edge_;
    Direction dir_;
};

// One epoch: b' = b - delta.f.
inline BalanceState apply_flow(const CreditNetwork& net, const RoutingSystem& r, const BalanceState& b,
                               const FlowVector& f)
{
    detail::check_dims(net, r, b.size(), f.size());
    if (auto v = detail::first_violation(net, r, b, f)) throw InfeasibleFlow(v->edge, v->dir);
    std::vector<Tokens> next = b.values();
    for (std::size_t p = 0; p < r.path_count(); ++p) {
        if (f[p] == 0) continue;
        for (const auto& e : r.column(p)) {
            if (e.sign > 0)
                next[e.index] -= f[p];
            else
                next[e.index] += f[p];
        }
    }
    return BalanceState(std::move(next));
}

enum class StateKind { Interior, Boundary, Corner };

// An imbalanced channel side: `depleted` is the direction that cannot send
// (Forward when b_k = 0, Backward when b_k = C_k).
struct ImbalancedSide {
    std::size_t edge;
    Direction depleted;
    friend bool operator==(const ImbalancedSide&, const ImbalancedSide&) = default;
};

struct StateClassification {
    StateKind kind = StateKind::Interior;
    std::vector<ImbalancedSide> imbalanced;
};

inline StateClassification classify_state(const CreditNetwork& net, const BalanceState& b)
{
    b.validate(net);
    StateClassification out;
    for (std::size_t k = 0; k < b.size(); ++k) {
        if (b[k] == 0)
            out.imbalanced.push_back({k, Direction::Forward});
        else if (b[k] == net.capacity(k))
            out.imbalanced.push_back({k, Direction::Backward});
    }
    if (out.imbalanced.empty())
        out.kind = StateKind::Interior;
    else if (out.imbalanced.size() == b.size())
        out.kind = StateKind::Corner;
    else
        out.kind = StateKind::Boundary;
    return out;
}

} // namespace creditnet

#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <deque>
#include <optional>
#include <ostream>
#include <string>
#include <unordered_map>
#include <vector>

#include "creditnet/deadlock.hpp"
#include "creditnet/network.hpp"

namespace creditnet {

struct DeadlockLimits {
    std::size_t max_edges = 20;
    double time_budget_seconds = 60.0;
};

enum class OracleStatus { Solved, Unsolved };

struct MaxDeadlockResult {
    OracleStatus status = OracleStatus::Unsolved;
    DeadlockAssignment assignment; // best found; exact when Solved
    std::size_t nodes = 0;         // search nodes visited
    std::string reason;            // why Unsolved

    bool solved() const noexcept { return status == OracleStatus::Solved; }
};

namespace detail {

// Per-edge value in the search. Depleted sides follow the ILP's x variables:
// FwdDepleted means x_(u,v) = 0, i.e. the lower-id end holds nothing.
enum class EdgeState : std::uint8_t { Open, FwdDepleted, BwdDepleted, Balanced };

class DeadlockSearch {
public:
    DeadlockSearch(const CreditNetwork& net, const PathSet& paths, double budget)
        : net_(net), E_(net.edge_count()), budget_(budget)
    {
        paths.validate(net);
        hops_.reserve(paths.size());
        by_edge_.resize(E_);
        for (std::size_t p = 0; p < paths.size(); ++p) {
            hops_.push_back(paths[p].hops);
            for (const auto& h : paths[p].hops) by_edge_[h.edge].push_back(p);
        }
        order_.resize(E_);
        for (std::size_t k = 0; k < E_; ++k) order_[k] = k;
        std::stable_sort(order_.begin(), order_.end(),
                         [&](std::size_t a, std::size_t b) { return by_edge_[a].size() > by_edge_[b].size(); });
    }

    // Searches for an assignment with more than `floor` deadlocked edges.
    // Returns false when the time budget ran out.
    bool run(std::size_t floor)
    {
        best_count_ = floor;
        start_ = std::chrono::steady_clock::now();
        std::vector<EdgeState> s(E_, EdgeState::Open);
        if (!propagate(s)) return true;
        return dfs(s);
    }

    const std::optional<std::vector<EdgeState>>& best() const noexcept { return best_; }
    std::size_t nodes() const noexcept { return nodes_; }

private:
    static bool depleted(EdgeState s) { return s == EdgeState::FwdDepleted || s == EdgeState::BwdDepleted; }
    static bool blocks(EdgeState s, Direction d)
    {
        return (s == EdgeState::FwdDepleted && d == Direction::Forward) || (s == EdgeState::BwdDepleted && d == Direction::Backward);
    }
    static EdgeState depletion(Direction d) { return d == Direction::Forward ? EdgeState::FwdDepleted : EdgeState::BwdDepleted; }

    // Fixpoint of two sound rules:
    //  a path through a depleted edge must be blocked somewhere; if exactly one
    //  hop is still open, that hop's edge must block it;
    //  an open edge cannot be depleted in direction d if some path using it in
    //  the other direction is free on all its other hops.
    bool propagate(std::vector<EdgeState>& s) const
    {
        bool changed = true;
        while (changed) {
            changed = false;
            for (const auto& hops : hops_) {
                bool blocked = false, needs = false;
                std::size_t open = 0;
                const Hop* last = nullptr;
                for (const auto& h : hops) {
                    EdgeState v = s[h.edge];
                    if (blocks(v, h.dir)) {
                        blocked = true;
                        break;
                    }
                    if (v == EdgeState::Open) {
                        ++open;
                        last = &h;
                    } else if (depleted(v)) {
                        needs = true;
                    }
                }
                if (blocked || !needs) continue;
                if (open == 0) return false;
                if (open == 1) {
                    s[last->edge] = depletion(last->dir);
                    changed = true;
                }
            }
            for (std::size_t k = 0; k < E_; ++k) {
                if (s[k] != EdgeState::Open) continue;
                bool can_fwd = true, can_bwd = true;
                for (std::size_t p : by_edge_[k]) {
                    bool free_elsewhere = true;
                    Direction here = Direction::Forward;
                    for (const auto& h : hops_[p]) {
                        if (h.edge == k) {
                            here = h.dir;
                            continue;
                        }
                        EdgeState v = s[h.edge];
                        if (v == EdgeState::Open || blocks(v, h.dir)) {
                            free_elsewhere = false;
                            break;
                        }
                    }
                    if (!free_elsewhere) continue;
                    // depleting k against `here` would leave this path running through a deadlocked edge
                    if (here == Direction::Forward)
                        can_bwd = false;
                    else
                        can_fwd = false;
                }
                if (!can_fwd && !can_bwd) {
                    s[k] = EdgeState::Balanced;
                    changed = true;
                }
            }
        }
        return true;
    }

    bool dfs(std::vector<EdgeState>& s)
    {
        ++nodes_;
        if ((nodes_ & 255) == 0) {
            double el = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
            if (el > budget_) return false;
        }
        std::size_t count = 0, open = 0;
        for (auto v : s) {
            if (depleted(v)) ++count;
            if (v == EdgeState::Open) ++open;
        }
        if (count + open <= best_count_) return true;
        long pick = -1;
        for (std::size_t k : order_)
            if (s[k] == EdgeState::Open) {
                pick = static_cast<long>(k);
                break;
            }
        if (pick < 0) {
            best_count_ = count;
            best_ = s;
            return true;
        }
        for (EdgeState v : {EdgeState::FwdDepleted, EdgeState::BwdDepleted, EdgeState::Balanced}) {
            std::vector<EdgeState> t = s;
            t[static_cast<std::size_t>(pick)] = v;
            if (!propagate(t)) continue;
            if (!dfs(t)) return false;
        }
        return true;
    }

    const CreditNetwork& net_;
    std::size_t E_;
    double budget_;
    std::vector<std::vector<Hop>> hops_;
    std::vector<std::vector<std::size_t>> by_edge_;
    std::vector<std::size_t> order_;
    std::size_t best_count_ = 0;
    std::optional<std::vector<EdgeState>> best_;
    std::size_t nodes_ = 0;
    std::chrono::steady_clock::time_point start_;
};

inline DeadlockAssignment make_assignment(const CreditNetwork& net, const std::vector<EdgeState>& s)
{
    DeadlockAssignment a;
    for (std::size_t k = 0; k < s.size(); ++k) {
        if (s[k] == EdgeState::FwdDepleted) a.edges.push_back({k, Direction::Forward});
        if (s[k] == EdgeState::BwdDepleted) a.edges.push_back({k, Direction::Backward});
    }
    a.witness = deadlock_witness(net, a.edges);
    return a;
}

} // namespace detail

// Largest set of simultaneously deadlocked edges (the deadlock ILP solved by
// branch and bound over per-edge imbalance states).
inline MaxDeadlockResult max_deadlock_exact(const CreditNetwork& net, const PathSet& paths, const DeadlockLimits& limits = {})
{
    MaxDeadlockResult res;
    res.assignment.witness = BalanceState::center(net);
    if (net.edge_count() > limits.max_edges) {
        res.reason = "edge count " + std::to_string(net.edge_count()) + " exceeds limit " + std::to_string(limits.max_edges);
        return res;
    }
    detail::DeadlockSearch search(net, paths, limits.time_budget_seconds);
    // the empty deadlock is always feasible, so look for anything larger
    bool finished = search.run(0);
    res.nodes = search.nodes();
    if (search.best()) res.assignment = detail::make_assignment(net, *search.best());
    if (!finished) {
        res.reason = "time budget exhausted";
        return res;
    }
    res.status = OracleStatus::Solved;
    return res;
}

// A deadlock covering every edge, if one exists.
inline std::optional<DeadlockAssignment> find_full_deadlock(const CreditNetwork& net, const PathSet& paths,
                                                            double time_budget_seconds = 60.0)
{
    if (net.edge_count() == 0) return DeadlockAssignment{{}, BalanceState::center(net)};
    detail::DeadlockSearch search(net, paths, time_budget_seconds);
    if (!search.run(net.edge_count() - 1)) throw LimitExceeded("full-deadlock search ran out of time");
    if (!search.best()) return std::nullopt;
    return detail::make_assignment(net, *search.best());
}

// True when every path through a deadlocked edge has a hop that cannot send
// under the witness state.
inline bool verify_deadlock(const CreditNetwork& net, const PathSet& paths, const DeadlockAssignment& a)
{
    std::vector<char> dead(net.edge_count(), 0);
    for (const auto& d : a.edges) dead.at(d.edge) = 1;
    for (const auto& p : paths) {
        bool touches = false, stuck = false;
        for (const auto& h : p.hops) {
            touches = touches || dead[h.edge];
            if (a.witness.available(net, h.edge, h.dir) == 0) stuck = true;
        }
        if (touches && !stuck) return false;
    }
    return true;
}

// The deadlock ILP in CPLEX LP format. Variables: x_k_f / x_k_b (side of edge
// k has tokens), y_p (path p can move), z_k (edge k is not deadlocked).
inline void export_ilp(std::ostream& out, const CreditNetwork& net, const PathSet& paths)
{
    paths.validate(net);
    auto x = [](const Hop& h) { return "x_" + std::to_string(h.edge) + (h.dir == Direction::Forward ? "_f" : "_b"); };
    std::size_t E = net.edge_count();
    out << "\\ deadlock ILP generated by creditnet\nMinimize\n obj:";
    if (E == 0) out << " 0 dummy";
    for (std::size_t k = 0; k < E; ++k) out << (k ? " + " : " ") << "z_" << k;
    out << "\nSubject To\n";
    for (std::size_t k = 0; k < E; ++k) out << " cap_" << k << ": x_" << k << "_f + x_" << k << "_b >= 1\n";
    for (std::size_t k = 0; k < E; ++k) out << " zdef_" << k << ": z_" << k << " - x_" << k << "_f - x_" << k << "_b = -1\n";
    for (std::size_t p = 0; p < paths.size(); ++p) {
        const auto& hops = paths[p].hops;
        for (std::size_t i = 0; i < hops.size(); ++i) out << " blk_" << p << '_' << i << ": y_" << p << " - " << x(hops[i]) << " <= 0\n";
        out << " run_" << p << ": y_" << p;
        for (const auto& h : hops) out << " - " << x(h);
        out << " >= " << (1 - static_cast<long>(hops.size())) << '\n';
        for (const auto& h : hops) out << " dl_" << h.edge << '_' << p << ": z_" << h.edge << " - y_" << p << " >= 0\n";
    }
    out << "Binaries\n";
    for (std::size_t k = 0; k < E; ++k) out << " x_" << k << "_f x_" << k << "_b z_" << k << '\n';
    for (std::size_t p = 0; p < paths.size(); ++p) out << " y_" << p << '\n';
    if (E == 0) out << " dummy\n";
    out << "End\n";
}

// Lattice step used by the reachability tools when none is given.
inline Tokens default_granularity(const CreditNetwork& net) { return net.min_capacity() / 2; }

namespace detail {

struct Lattice {
    std::vector<std::int64_t> top; // C_k / g
    std::uint64_t size = 1;
};

inline Lattice make_lattice(const CreditNetwork& net, const Tokens& g, std::uint64_t limit)
{
    if (!(g > 0)) throw InvalidInput("granularity must be positive");
    Lattice lat;
    bool over = false;
    long double estimate = 1;
    for (std::size_t k = 0; k < net.edge_count(); ++k) {
        Tokens steps = net.capacity(k) / g;
        if (denominator(steps) != 1)
            throw InvalidInput("capacity of edge " + std::to_string(k) + " is not a multiple of the granularity");
        auto t = static_cast<std::int64_t>(numerator(steps));
        lat.top.push_back(t);
        estimate *= static_cast<long double>(t + 1);
        if (!over && lat.size > limit / static_cast<std::uint64_t>(t + 1)) over = true;
        if (!over) lat.size *= static_cast<std::uint64_t>(t + 1);
    }
    if (over || lat.size > limit)
        throw LimitExceeded("balance lattice has about " + std::to_string(static_cast<double>(estimate)) +
                            " states (limit " + std::to_string(limit) + ")");
    return lat;
}

struct VecHash {
    std::size_t operator()(const std::vector<std::int64_t>& v) const noexcept
    {
        std::size_t h = 1469598103934665603ull;
        for (auto x : v) h = (h ^ static_cast<std::size_t>(x)) * 1099511628211ull;
        return h;
    }
};

} // namespace detail

// Balance states reachable from b0 when every path moves in multiples of g.
// Any feasible lattice flow decomposes into single-path unit moves that are
// each feasible in sequence, so the search only takes unit moves. Sorted.
inline std::vector<BalanceState> enumerate_reachable(const CreditNetwork& net, const RoutingSystem& r, const BalanceState& b0,
                                                     const Tokens& g, std::uint64_t max_states = 1000000)
{
    detail::check_dims(net, r, b0.size(), r.path_count());
    b0.validate(net);
    auto lat = detail::make_lattice(net, g, max_states);
    std::vector<std::int64_t> start(net.edge_count());
    for (std::size_t k = 0; k < net.edge_count(); ++k) {
        Tokens s = b0[k] / g;
        if (denominator(s) != 1) throw InvalidInput("start balance of edge " + std::to_string(k) + " is off the lattice");
        start[k] = static_cast<std::int64_t>(numerator(s));
    }
    std::unordered_map<std::vector<std::int64_t>, char, detail::VecHash> seen;
    std::deque<std::vector<std::int64_t>> queue{start};
    seen.emplace(start, 1);
    std::vector<std::vector<std::int64_t>> found{start};
    while (!queue.empty()) {
        auto cur = std::move(queue.front());
        queue.pop_front();
        for (std::size_t p = 0; p < r.path_count(); ++p) {
            const auto& col = r.column(p);
            if (col.empty()) continue;
            bool ok = true;
            for (const auto& e : col) {
                // forward use needs tokens at the lower end, backward at the upper end
                if (e.sign > 0 ? cur[e.index] < 1 : cur[e.index] > lat.top[e.index] - 1) {
                    ok = false;
                    break;
                }
            }
            if (!ok) continue;
            auto next = cur;
            for (const auto& e : col) next[e.index] += e.sign > 0 ? -1 : 1;
            if (seen.emplace(next, 1).second) {
                found.push_back(next);
                queue.push_back(std::move(next));
            }
        }
    }
    std::sort(found.begin(), found.end());
    std::vector<BalanceState> out;
    out.reserve(found.size());
    for (const auto& v : found) {
        std::vector<Tokens> b;
        b.reserve(v.size());
        for (auto x : v) b.push_back(Tokens(x) * g);
        out.emplace_back(std::move(b));
    }
    return out;
}

// Edges whose balance never changes over the reachable set.
inline std::vector<std::size_t> deadlocked_channels_bruteforce(const CreditNetwork& net, const RoutingSystem& r,
                                                              const BalanceState& b, const Tokens& g,
                                                              std::uint64_t max_states = 1000000)
{
    auto states = enumerate_reachable(net, r, b, g, max_states);
    std::vector<std::size_t> out;
    for (std::size_t k = 0; k < net.edge_count(); ++k) {
        bool fixed = true;
        for (const auto& s : states)
            if (s[k] != b[k]) {
                fixed = false;
                break;
            }
        if (fixed) out.push_back(k);
    }
    return out;
}

} // namespace creditnet

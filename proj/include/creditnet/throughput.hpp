#pragma once

#include <algorithm>
#include <set>
#include <vector>

#include "creditnet/deadlock.hpp"
#include "creditnet/lp.hpp"
#include "creditnet/network.hpp"

namespace creditnet {

template <class T>
struct BasicThroughputReport {
    T psi_value = T(0);
    std::vector<T> optimal_flow; // indexed like the path set
    LpStatus solver_status = LpStatus::Optimal;
};

using ThroughputReport = BasicThroughputReport<double>;
using ExactThroughputReport = BasicThroughputReport<Tokens>;

// The one-step throughput LP written out literally: maximize 1.f subject to
// forward.f <= b, backward.f <= C - b, delta.f = 0, f >= 0.
template <class T = double>
BasicLpProblem<T> build_psi_lp(const CreditNetwork& net, const RoutingSystem& r, const BalanceState& b)
{
    b.validate(net);
    std::size_t E = net.edge_count(), P = r.path_count();
    BasicLpProblem<T> lp;
    lp.objective.assign(P, T(1));
    auto conv = [](const Tokens& t) {
        if constexpr (std::is_same_v<T, Tokens>)
            return t;
        else
            return to_double(t);
    };
    for (std::size_t k = 0; k < E; ++k) {
        std::vector<T> fwd(P, T(0)), bwd(P, T(0)), del(P, T(0));
        for (const auto& e : r.row(k)) {
            (e.sign > 0 ? fwd : bwd)[e.index] = T(1);
            del[e.index] = T(e.sign);
        }
        lp.ub_rows.push_back(std::move(fwd));
        lp.ub_rhs.push_back(conv(b[k]));
        lp.ub_rows.push_back(std::move(bwd));
        lp.ub_rhs.push_back(conv(net.capacity(k) - b[k]));
        lp.eq_rows.push_back(std::move(del));
        lp.eq_rhs.push_back(T(0));
    }
    for (std::size_t p = 0; p < P; ++p) lp.names.push_back("f_" + std::to_string(p));
    return lp;
}

namespace detail {

// Solves the throughput LP given per-edge limits u_k = min(b_k, C_k - b_k).
// Under delta.f = 0 the forward and backward loads of every edge coincide, so
// one row per edge plus the circulation row is enough. Paths through an edge
// with u_k = 0, and paths through an edge used in only one direction by the
// surviving paths, carry no flow and are dropped before the LP is built.
template <class T>
BasicThroughputReport<T> psi_from_limits(const RoutingSystem& r, const std::vector<T>& limit)
{
    std::size_t E = r.edge_count(), P = r.path_count();
    std::vector<char> alive(P, 1);
    for (std::size_t p = 0; p < P; ++p)
        for (const auto& e : r.column(p))
            if (!(limit[e.index] > T(0))) alive[p] = 0;
    // one-directional edges force zero flow on every path through them
    std::vector<int> fcount(E, 0), bcount(E, 0);
    for (std::size_t p = 0; p < P; ++p)
        if (alive[p])
            for (const auto& e : r.column(p)) ++(e.sign > 0 ? fcount : bcount)[e.index];
    std::vector<std::size_t> queue;
    for (std::size_t k = 0; k < E; ++k)
        if ((fcount[k] > 0) != (bcount[k] > 0)) queue.push_back(k);
    while (!queue.empty()) {
        std::size_t k = queue.back();
        queue.pop_back();
        for (const auto& pe : r.row(k)) {
            if (!alive[pe.index]) continue;
            alive[pe.index] = 0;
            for (const auto& e : r.column(pe.index)) {
                int& c = (e.sign > 0 ? fcount : bcount)[e.index];
                --c;
                if (c == 0 && (fcount[e.index] + bcount[e.index]) > 0) queue.push_back(e.index);
            }
        }
    }
    std::vector<std::size_t> vars;
    for (std::size_t p = 0; p < P; ++p)
        if (alive[p]) vars.push_back(p);
    BasicThroughputReport<T> rep;
    rep.optimal_flow.assign(P, T(0));
    if (vars.empty()) return rep;
    std::vector<long> pos(P, -1);
    for (std::size_t i = 0; i < vars.size(); ++i) pos[vars[i]] = static_cast<long>(i);
    BasicLpSolution<T> sol;
    if constexpr (std::is_same_v<T, double>) {
        // same rows, built column-wise: all load rows first, then the delta rows
        SparseLp lp;
        lp.objective.assign(vars.size(), 1.0);
        lp.columns.resize(vars.size());
        std::vector<std::size_t> active;
        for (std::size_t k = 0; k < E; ++k)
            if (fcount[k] > 0) active.push_back(k);
        lp.ub_rows = active.size();
        lp.rows = 2 * active.size();
        for (std::size_t a = 0; a < active.size(); ++a) lp.rhs.push_back(limit[active[a]]);
        lp.rhs.resize(lp.rows, 0.0);
        for (std::size_t a = 0; a < active.size(); ++a)
            for (const auto& pe : r.row(active[a])) {
                if (pos[pe.index] < 0) continue;
                auto j = static_cast<std::size_t>(pos[pe.index]);
                if (pe.sign > 0) lp.columns[j].emplace_back(a, 1.0);
                lp.columns[j].emplace_back(active.size() + a, static_cast<double>(pe.sign));
            }
        for (auto& col : lp.columns) std::sort(col.begin(), col.end());
        sol = solve_sparse(lp, SimplexOptions{});
    } else {
        BasicLpProblem<T> lp;
        lp.objective.assign(vars.size(), T(1));
        for (std::size_t k = 0; k < E; ++k) {
            if (fcount[k] == 0) continue;
            std::vector<T> load(vars.size(), T(0)), del(vars.size(), T(0));
            for (const auto& pe : r.row(k)) {
                if (pos[pe.index] < 0) continue;
                auto j = static_cast<std::size_t>(pos[pe.index]);
                if (pe.sign > 0) load[j] = T(1);
                del[j] = T(pe.sign);
            }
            lp.ub_rows.push_back(std::move(load));
            lp.ub_rhs.push_back(limit[k]);
            lp.eq_rows.push_back(std::move(del));
            lp.eq_rhs.push_back(T(0));
        }
        sol = solve_lp(lp);
    }
    rep.solver_status = sol.status;
    if (sol.status != LpStatus::Optimal) return rep;
    rep.psi_value = sol.objective;
    for (std::size_t i = 0; i < vars.size(); ++i) rep.optimal_flow[vars[i]] = sol.x[i];
    return rep;
}

template <class T>
std::vector<T> balance_limits(const CreditNetwork& net, const BalanceState& b)
{
    b.validate(net);
    std::vector<T> u;
    u.reserve(net.edge_count());
    for (std::size_t k = 0; k < net.edge_count(); ++k) {
        Tokens lim = std::min(b[k], Tokens(net.capacity(k) - b[k]));
        if constexpr (std::is_same_v<T, Tokens>)
            u.push_back(lim);
        else
            u.push_back(to_double(lim));
    }
    return u;
}

template <class T>
std::vector<T> center_limits(const CreditNetwork& net, const std::vector<std::size_t>& zeroed)
{
    std::vector<T> u = balance_limits<T>(net, BalanceState::center(net));
    for (std::size_t k : zeroed) {
        if (k >= u.size()) throw InvalidInput("unpeeled edge index " + std::to_string(k) + " out of range");
        u[k] = T(0);
    }
    return u;
}

inline void check_routing(const CreditNetwork& net, const RoutingSystem& r)
{
    if (r.edge_count() != net.edge_count()) throw InvalidInput("routing system built for a different network");
}

template <class T>
T require_optimal(const BasicThroughputReport<T>& rep)
{
    if (rep.solver_status != LpStatus::Optimal)
        throw InternalError(std::string("throughput LP did not solve: ") + lp_status_name(rep.solver_status));
    return rep.psi_value;
}

} // namespace detail

inline ThroughputReport one_step_throughput(const CreditNetwork& net, const RoutingSystem& r, const BalanceState& b)
{
    detail::check_routing(net, r);
    return detail::psi_from_limits<double>(r, detail::balance_limits<double>(net, b));
}

inline ExactThroughputReport one_step_throughput_exact(const CreditNetwork& net, const RoutingSystem& r,
                                                       const BalanceState& b)
{
    detail::check_routing(net, r);
    return detail::psi_from_limits<Tokens>(r, detail::balance_limits<Tokens>(net, b));
}

// psi(C/2)
inline double max_throughput(const CreditNetwork& net, const RoutingSystem& r)
{
    detail::check_routing(net, r);
    return detail::require_optimal(detail::psi_from_limits<double>(r, detail::center_limits<double>(net, {})));
}

inline Tokens max_throughput_exact(const CreditNetwork& net, const RoutingSystem& r)
{
    detail::check_routing(net, r);
    return detail::require_optimal(detail::psi_from_limits<Tokens>(r, detail::center_limits<Tokens>(net, {})));
}

// psi(C'/2) where C' zeroes the capacity of every unpeeled edge.
inline double min_throughput(const CreditNetwork& net, const RoutingSystem& r, const std::vector<std::size_t>& unpeeled)
{
    detail::check_routing(net, r);
    return detail::require_optimal(detail::psi_from_limits<double>(r, detail::center_limits<double>(net, unpeeled)));
}

inline Tokens min_throughput_exact(const CreditNetwork& net, const RoutingSystem& r,
                                   const std::vector<std::size_t>& unpeeled)
{
    detail::check_routing(net, r);
    return detail::require_optimal(detail::psi_from_limits<Tokens>(r, detail::center_limits<Tokens>(net, unpeeled)));
}

// psi at the state where deadlocked edges keep their deadlock balances and all
// others sit at C/2.
inline double worst_state_throughput(const CreditNetwork& net, const RoutingSystem& r, const DeadlockAssignment& d)
{
    return detail::require_optimal(one_step_throughput(net, r, deadlock_witness(net, d.edges)));
}

inline Tokens worst_state_throughput_exact(const CreditNetwork& net, const RoutingSystem& r,
                                           const DeadlockAssignment& d)
{
    return detail::require_optimal(one_step_throughput_exact(net, r, deadlock_witness(net, d.edges)));
}

} // namespace creditnet

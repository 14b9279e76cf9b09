#pragma once

#include <cstdint>
#include <ostream>
#include <random>
#include <vector>

#include "creditnet/network.hpp"

namespace creditnet {

// Directed channel id: 2 * edge + 0 for red (forward use), + 1 for blue (backward use).
using ChannelId = std::uint32_t;

inline ChannelId channel_id(std::size_t edge, Direction d)
{
    return static_cast<ChannelId>(2 * edge + (d == Direction::Backward ? 1 : 0));
}
inline ChannelId channel_id(const Hop& h) { return channel_id(h.edge, h.dir); }
inline ChannelId opposite_channel(ChannelId c) { return c ^ 1u; }
inline std::size_t channel_edge(ChannelId c) { return c / 2; }
inline Direction channel_direction(ChannelId c) { return (c & 1u) ? Direction::Backward : Direction::Forward; }
inline const char* channel_color(ChannelId c) { return (c & 1u) ? "blue" : "red"; }

// Flow/channel bipartite graph. Flow i keeps its initial hop list; the
// channel side lists, for each directed channel, the flows that use it.
struct PeelingGraph {
    std::size_t edge_count = 0;
    std::vector<std::vector<ChannelId>> flows;
    std::vector<std::vector<std::uint32_t>> users; // indexed by ChannelId

    std::size_t flow_count() const noexcept { return flows.size(); }
    std::size_t channel_count() const noexcept { return 2 * edge_count; }

    std::size_t degree_one_count() const
    {
        std::size_t n = 0;
        for (const auto& f : flows) n += f.size() == 1;
        return n;
    }
};

inline PeelingGraph build_peeling_graph(const CreditNetwork& net, const PathSet& paths)
{
    paths.validate(net);
    PeelingGraph g;
    g.edge_count = net.edge_count();
    g.users.resize(g.channel_count());
    g.flows.reserve(paths.size());
    for (std::size_t p = 0; p < paths.size(); ++p) {
        std::vector<ChannelId> hops;
        hops.reserve(paths[p].length());
        for (const auto& h : paths[p].hops) {
            hops.push_back(channel_id(h));
            g.users[channel_id(h)].push_back(static_cast<std::uint32_t>(p));
        }
        g.flows.push_back(std::move(hops));
    }
    return g;
}

enum class PeelOutcome { Success, Failure };

struct RippleSample {
    std::size_t step;
    std::size_t ripple_size;
    std::size_t unprocessed;
    friend bool operator==(const RippleSample&, const RippleSample&) = default;
};

struct PeelResult {
    PeelOutcome outcome = PeelOutcome::Failure;
    std::vector<ChannelId> processed_order;
    std::vector<char> processed; // indexed by ChannelId
    std::vector<std::size_t> unpeeled_edges;
    std::vector<RippleSample> trace; // row 0 is the state after the initial releases

    bool is_processed(ChannelId c) const { return processed.at(c) != 0; }
    std::size_t processed_count() const noexcept { return processed_order.size(); }
};

struct PeelOptions {
    std::uint64_t seed = 1;
    // process a channel's opposite direction right after it when both are in the ripple
    bool pair_opposite = false;
};

namespace detail {

// Set of directed channels with O(1) insert, erase and uniform sampling.
class Ripple {
public:
    explicit Ripple(std::size_t universe) : pos_(universe, -1) {}

    bool contains(ChannelId c) const { return pos_[c] >= 0; }
    std::size_t size() const noexcept { return items_.size(); }
    bool empty() const noexcept { return items_.empty(); }

    void insert(ChannelId c)
    {
        if (contains(c)) return;
        pos_[c] = static_cast<long>(items_.size());
        items_.push_back(c);
    }

    void erase(ChannelId c)
    {
        long i = pos_[c];
        if (i < 0) return;
        ChannelId last = items_.back();
        items_[static_cast<std::size_t>(i)] = last;
        pos_[last] = i;
        items_.pop_back();
        pos_[c] = -1;
    }

    template <class Rng>
    ChannelId pop_random(Rng& rng)
    {
        std::uniform_int_distribution<std::size_t> d(0, items_.size() - 1);
        ChannelId c = items_[d(rng)];
        erase(c);
        return c;
    }

private:
    std::vector<long> pos_;
    std::vector<ChannelId> items_;
};

} // namespace detail

inline PeelResult peel(const PeelingGraph& g, const PeelOptions& opt = {})
{
    const std::size_t C = g.channel_count();
    PeelResult res;
    res.processed.assign(C, 0);
    detail::Ripple ripple(C);
    std::vector<std::size_t> degree(g.flow_count());
    std::vector<char> alive(g.flow_count(), 1);
    auto cover = [&](ChannelId c) {
        if (!res.processed[c]) ripple.insert(c);
    };
    for (std::size_t p = 0; p < g.flow_count(); ++p) {
        degree[p] = g.flows[p].size();
        if (degree[p] == 1) {
            alive[p] = 0;
            cover(opposite_channel(g.flows[p][0]));
        } else if (degree[p] == 0) {
            alive[p] = 0;
        }
    }
    res.trace.push_back({0, ripple.size(), C});
    std::mt19937_64 rng(opt.seed);
    long forced = -1;
    while (!ripple.empty()) {
        ChannelId c;
        if (forced >= 0) {
            c = static_cast<ChannelId>(forced);
            ripple.erase(c);
            forced = -1;
        } else {
            c = ripple.pop_random(rng);
        }
        res.processed[c] = 1;
        res.processed_order.push_back(c);
        for (std::uint32_t p : g.users[c]) {
            if (!alive[p]) continue;
            --degree[p];
            if (degree[p] == 1) {
                for (ChannelId h : g.flows[p])
                    if (!res.processed[h]) {
                        cover(opposite_channel(h));
                        break;
                    }
            } else if (degree[p] == 0) {
                alive[p] = 0;
                for (ChannelId h : g.flows[p]) cover(opposite_channel(h));
            }
        }
        if (opt.pair_opposite && ripple.contains(opposite_channel(c))) forced = opposite_channel(c);
        res.trace.push_back({res.processed_order.size(), ripple.size(), C - res.processed_order.size()});
    }
    for (std::size_t k = 0; k < g.edge_count; ++k)
        if (!res.processed[2 * k] || !res.processed[2 * k + 1]) res.unpeeled_edges.push_back(k);
    res.outcome = res.processed_order.size() == C ? PeelOutcome::Success : PeelOutcome::Failure;
    return res;
}

inline PeelResult peel(const CreditNetwork& net, const PathSet& paths, const PeelOptions& opt = {})
{
    return peel(build_peeling_graph(net, paths), opt);
}

inline const char* peel_outcome_name(PeelOutcome o) { return o == PeelOutcome::Success ? "Success" : "Failure"; }

// Columns: unprocessed_symbols,ripple_size (one row per trace sample).
inline void write_ripple_trace_csv(std::ostream& out, const PeelResult& r)
{
    out << "unprocessed_symbols,ripple_size\n";
    for (const auto& s : r.trace) out << s.unprocessed << ',' << s.ripple_size << '\n';
}

} // namespace creditnet

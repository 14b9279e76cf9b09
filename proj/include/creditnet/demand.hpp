#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <random>
#include <string>
#include <unordered_set>
#include <vector>

#include "creditnet/io.hpp"
#include "creditnet/network.hpp"

namespace creditnet {

struct DemandPair {
    NodeId sender;
    NodeId receiver;
    friend bool operator==(const DemandPair&, const DemandPair&) = default;
};

// Ordered sender/receiver pairs in sampling order; no duplicates, no self-pairs.
class DemandMatrix {
public:
    DemandMatrix() = default;
    DemandMatrix(std::vector<DemandPair> pairs, std::size_t node_count) : pairs_(std::move(pairs))
    {
        std::unordered_set<std::uint64_t> seen;
        for (const auto& p : pairs_) {
            if (p.sender == p.receiver) throw InvalidInput("demand pair with sender == receiver");
            if (p.sender >= node_count || p.receiver >= node_count) throw InvalidInput("demand pair node id out of range");
            if (!seen.insert(key(p)).second)
                throw InvalidInput("duplicate demand pair " + std::to_string(p.sender) + " " + std::to_string(p.receiver));
        }
    }

    std::size_t size() const noexcept { return pairs_.size(); }
    const DemandPair& operator[](std::size_t i) const { return pairs_[i]; }
    auto begin() const { return pairs_.begin(); }
    auto end() const { return pairs_.end(); }
    const std::vector<DemandPair>& pairs() const noexcept { return pairs_; }

    static std::uint64_t key(const DemandPair& p) { return (std::uint64_t(p.sender) << 32) | p.receiver; }

    friend bool operator==(const DemandMatrix&, const DemandMatrix&) = default;

private:
    std::vector<DemandPair> pairs_;
};

enum class DemandMode { Uniform, Skewed };

struct DemandSpec {
    std::size_t pair_count = 0;
    DemandMode mode = DemandMode::Uniform;
    double heavy_fraction = 0.10;
    double heavy_probability = 0.70;
    std::uint64_t seed = 1;
};

// Endpoint law of the skewed mode: a fixed heavy set of round(fraction * n)
// nodes is drawn first; each endpoint comes from the heavy set with
// probability heavy_probability, else uniformly from the rest.
class SkewedEndpointSampler {
public:
    template <class Rng>
    SkewedEndpointSampler(std::size_t n, double fraction, double probability, Rng& rng) : probability_(probability)
    {
        std::vector<NodeId> all(n);
        for (NodeId v = 0; v < n; ++v) all[v] = v;
        std::size_t h = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
        h = std::clamp<std::size_t>(h, 1, n);
        for (std::size_t i = 0; i < h; ++i) {
            std::uniform_int_distribution<std::size_t> d(i, n - 1);
            std::swap(all[i], all[d(rng)]);
        }
        heavy_.assign(all.begin(), all.begin() + static_cast<long>(h));
        light_.assign(all.begin() + static_cast<long>(h), all.end());
        std::sort(heavy_.begin(), heavy_.end());
        std::sort(light_.begin(), light_.end());
    }

    template <class Rng>
    NodeId draw(Rng& rng) const
    {
        std::uniform_real_distribution<double> coin(0.0, 1.0);
        const auto& pool = (light_.empty() || coin(rng) < probability_) ? heavy_ : light_;
        std::uniform_int_distribution<std::size_t> d(0, pool.size() - 1);
        return pool[d(rng)];
    }

    const std::vector<NodeId>& heavy() const noexcept { return heavy_; }
    bool is_heavy(NodeId v) const { return std::binary_search(heavy_.begin(), heavy_.end(), v); }

private:
    double probability_;
    std::vector<NodeId> heavy_, light_;
};

namespace detail {

template <class Rng>
DemandMatrix sample_uniform(std::size_t n, std::size_t count, Rng& rng)
{
    std::size_t total = n * (n - 1);
    std::vector<DemandPair> out;
    out.reserve(count);
    if (count * 2 > total) {
        std::vector<DemandPair> all;
        all.reserve(total);
        for (NodeId s = 0; s < n; ++s)
            for (NodeId t = 0; t < n; ++t)
                if (s != t) all.push_back({s, t});
        for (std::size_t i = 0; i < count; ++i) {
            std::uniform_int_distribution<std::size_t> d(i, total - 1);
            std::swap(all[i], all[d(rng)]);
        }
        out.assign(all.begin(), all.begin() + static_cast<long>(count));
        return DemandMatrix(std::move(out), n);
    }
    std::unordered_set<std::uint64_t> seen;
    std::uniform_int_distribution<NodeId> node(0, static_cast<NodeId>(n - 1));
    while (out.size() < count) {
        DemandPair p{node(rng), node(rng)};
        if (p.sender == p.receiver || !seen.insert(DemandMatrix::key(p)).second) continue;
        out.push_back(p);
    }
    return DemandMatrix(std::move(out), n);
}

} // namespace detail

inline DemandMatrix sample_demand(const CreditNetwork& net, const DemandSpec& spec)
{
    std::size_t n = net.node_count();
    if (n < 2 && spec.pair_count > 0) throw InvalidInput("demand needs at least 2 nodes");
    if (spec.pair_count > n * (n - 1))
        throw InvalidInput("pair count " + std::to_string(spec.pair_count) + " exceeds n(n-1) = " +
                           std::to_string(n * (n - 1)));
    std::mt19937_64 rng(spec.seed);
    if (spec.mode == DemandMode::Uniform) return detail::sample_uniform(n, spec.pair_count, rng);
    if (!(spec.heavy_fraction > 0 && spec.heavy_fraction <= 1) || !(spec.heavy_probability > 0 && spec.heavy_probability < 1))
        throw InvalidInput("skewed demand needs heavy fraction in (0,1] and probability in (0,1)");
    if (std::llround(spec.heavy_fraction * static_cast<double>(n)) >= static_cast<long long>(n))
        return detail::sample_uniform(n, spec.pair_count, rng);
    SkewedEndpointSampler sampler(n, spec.heavy_fraction, spec.heavy_probability, rng);
    std::unordered_set<std::uint64_t> seen;
    std::vector<DemandPair> out;
    out.reserve(spec.pair_count);
    std::size_t attempts = 0;
    std::size_t budget = 1000 * spec.pair_count + 1000000;
    while (out.size() < spec.pair_count) {
        if (++attempts > budget) throw LimitExceeded("skewed demand sampling did not reach the pair count");
        NodeId s = sampler.draw(rng);
        NodeId t = sampler.draw(rng);
        while (t == s) t = sampler.draw(rng);
        DemandPair p{s, t};
        if (!seen.insert(DemandMatrix::key(p)).second) continue;
        out.push_back(p);
    }
    return DemandMatrix(std::move(out), n);
}

// One BFS shortest path per pair. The search always starts from the smaller
// endpoint id and expands neighbours in ascending id order; the result is
// reversed when the sender is the larger id, so (u,v) and (v,u) share a route.
// The seed is accepted for interface stability and not used.
inline PathSet build_paths(const CreditNetwork& net, const DemandMatrix& demand, std::uint64_t seed = 0)
{
    (void)seed;
    std::size_t n = net.node_count();
    std::vector<std::vector<long>> parent_of(n);
    auto tree = [&](NodeId root) -> const std::vector<long>& {
        auto& par = parent_of[root];
        if (!par.empty()) return par;
        par.assign(n, -1);
        par[root] = root;
        std::vector<NodeId> queue{root};
        for (std::size_t h = 0; h < queue.size(); ++h)
            for (const auto& nb : net.neighbors(queue[h]))
                if (par[nb.node] < 0) {
                    par[nb.node] = queue[h];
                    queue.push_back(nb.node);
                }
        return par;
    };
    PathSet out;
    for (const auto& d : demand) {
        NodeId lo = std::min(d.sender, d.receiver), hi = std::max(d.sender, d.receiver);
        const auto& par = tree(lo);
        if (par[hi] < 0)
            throw InvalidInput("no path between " + std::to_string(d.sender) + " and " + std::to_string(d.receiver));
        std::vector<NodeId> seq{hi};
        while (seq.back() != lo) seq.push_back(static_cast<NodeId>(par[seq.back()]));
        // seq runs hi -> lo
        if (d.sender == lo) std::reverse(seq.begin(), seq.end());
        out.push_back(path_from_nodes(net, seq));
    }
    return out;
}

inline void write_demand(std::ostream& out, const DemandMatrix& d)
{
    for (const auto& p : d) out << p.sender << ' ' << p.receiver << '\n';
}

inline DemandMatrix read_demand(std::istream& in, std::size_t node_count)
{
    std::vector<DemandPair> pairs;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto tok = detail::tokenize_line(line);
        if (tok.empty()) continue;
        if (tok.size() != 2) throw InvalidInput("line " + std::to_string(line_no) + ": expected 'src dst'");
        pairs.push_back({detail::parse_node(tok[0], line_no), detail::parse_node(tok[1], line_no)});
    }
    return DemandMatrix(std::move(pairs), node_count);
}

inline DemandMatrix load_demand(const std::string& file, std::size_t node_count)
{
    std::ifstream in(file);
    if (!in) throw InvalidInput("cannot open demand file '" + file + "'");
    return read_demand(in, node_count);
}

} // namespace creditnet

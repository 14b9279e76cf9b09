#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "creditnet/network.hpp"
#include "creditnet/parallel.hpp"
#include "creditnet/peeling.hpp"

namespace creditnet {

// Omega(d) for d = 1..max_degree(), stored at index d - 1.
class PathLengthDistribution {
public:
    PathLengthDistribution() = default;

    explicit PathLengthDistribution(std::vector<double> probabilities) : p_(std::move(probabilities))
    {
        trim();
        validate();
    }

    // Normalizes non-negative weights (counts, masses) into a distribution.
    static PathLengthDistribution from_weights(std::vector<double> w)
    {
        double total = 0;
        for (std::size_t i = 0; i < w.size(); ++i) {
            if (!(w[i] >= 0) || !std::isfinite(w[i]))
                throw InvalidInput("weight for length " + std::to_string(i + 1) + " must be finite and non-negative");
            total += w[i];
        }
        if (!(total > 0)) throw InvalidInput("path length weights sum to zero");
        for (auto& x : w) x /= total;
        return PathLengthDistribution(std::move(w));
    }

    static PathLengthDistribution from_paths(const PathSet& paths)
    {
        std::vector<double> w;
        for (const auto& p : paths) {
            if (p.length() == 0) continue;
            if (w.size() < p.length()) w.resize(p.length(), 0.0);
            w[p.length() - 1] += 1;
        }
        return from_weights(std::move(w));
    }

    void validate() const
    {
        double total = 0;
        for (std::size_t i = 0; i < p_.size(); ++i) {
            if (!(p_[i] >= 0)) throw InvalidInput("Omega(" + std::to_string(i + 1) + ") is negative");
            total += p_[i];
        }
        if (std::abs(total - 1.0) > 1e-12) throw InvalidInput("path length probabilities sum to " + std::to_string(total));
    }

    double operator()(std::size_t d) const { return d >= 1 && d <= p_.size() ? p_[d - 1] : 0.0; }
    std::size_t max_degree() const noexcept { return p_.size(); }
    const std::vector<double>& probabilities() const noexcept { return p_; }

    double mean() const
    {
        double m = 0;
        for (std::size_t i = 0; i < p_.size(); ++i) m += static_cast<double>(i + 1) * p_[i];
        return m;
    }

    friend bool operator==(const PathLengthDistribution&, const PathLengthDistribution&) = default;

private:
    void trim()
    {
        while (!p_.empty() && p_.back() == 0.0) p_.pop_back();
    }
    std::vector<double> p_;
};

// CSV with header d,probability. Rows may come in any order; probabilities
// are renormalized when they sum to 1 within 1e-6 (printed decimals).
inline PathLengthDistribution read_distribution_csv(std::istream& in)
{
    std::string line;
    std::size_t line_no = 0;
    std::vector<double> w;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        if (line_no == 1 && line.find_first_not_of("0123456789.,-+eE \t\r") != std::string::npos) continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ls(line);
        long d = 0;
        double p = 0;
        if (!(ls >> d >> p) || d < 1) throw InvalidInput("line " + std::to_string(line_no) + ": expected d,probability");
        if (w.size() < static_cast<std::size_t>(d)) w.resize(static_cast<std::size_t>(d), 0.0);
        w[static_cast<std::size_t>(d - 1)] += p;
    }
    double total = 0;
    for (double x : w) total += x;
    if (std::abs(total - 1.0) > 1e-6) throw InvalidInput("probabilities sum to " + std::to_string(total));
    return PathLengthDistribution::from_weights(std::move(w));
}

inline PathLengthDistribution load_distribution_csv(const std::string& file)
{
    std::ifstream in(file);
    if (!in) throw InvalidInput("cannot open distribution file '" + file + "'");
    return read_distribution_csv(in);
}

inline void write_distribution_csv(std::ostream& out, const PathLengthDistribution& dist)
{
    out << "d,probability\n";
    auto old = out.precision(17);
    for (std::size_t d = 1; d <= dist.max_degree(); ++d) out << d << ',' << dist(d) << '\n';
    out.precision(old);
}

namespace detail {

// prod_{j=0}^{d-3} (k - (L+1) - j) / (k - j); log space for long products.
inline double release_product(std::size_t d, double L, std::size_t k)
{
    double kk = static_cast<double>(k);
    if (d <= 8) {
        double prod = 1;
        for (std::size_t j = 0; j + 3 <= d; ++j) {
            double num = kk - (L + 1) - static_cast<double>(j);
            if (num <= 0) return 0;
            prod *= num / (kk - static_cast<double>(j));
        }
        return prod;
    }
    double lg = 0;
    for (std::size_t j = 0; j + 3 <= d; ++j) {
        double num = kk - (L + 1) - static_cast<double>(j);
        if (num <= 0) return 0;
        lg += std::log(num) - std::log(kk - static_cast<double>(j));
    }
    return std::exp(lg);
}

inline double release_lead(std::size_t d, std::size_t k)
{
    double kk = static_cast<double>(k), dd = static_cast<double>(d);
    return dd * (dd - 1) / ((kk - dd + 1) * (kk - dd + 2));
}

} // namespace detail

// Probability that a flow of degree d is released at the step that leaves L
// of k channels unprocessed. Degree-1 flows are released at the start (L = k).
inline double release_prob(std::size_t d, std::size_t L, std::size_t k)
{
    if (d == 0 || d > k || L > k) return 0;
    if (d == 1) return L == k ? 1.0 : 0.0;
    if (L < 1 || L > k - d + 1) return 0;
    return detail::release_lead(d, k) * static_cast<double>(L) * detail::release_product(d, static_cast<double>(L), k);
}

// As release_prob, but the released channel must also be outside a ripple of
// size R. R may be fractional (target curves).
inline double ripple_add_prob(std::size_t d, std::size_t L, double R, std::size_t k)
{
    if (d == 0 || d > k || L > k) return 0;
    double LL = static_cast<double>(L);
    if (d == 1) return L == k && R == 0 ? 1.0 : 0.0;
    if (L < 1 || L > k - d + 1 || R < 1 || R > LL) return 0;
    return detail::release_lead(d, k) * (LL - R + 1) * detail::release_product(d, LL, k);
}

// Q(L) without overlap: sum_d m Omega(d) ripple_add_prob(d, L, R).
inline double expected_added_naive(const PathLengthDistribution& dist, double m, std::size_t L, double R, std::size_t k)
{
    double q = 0;
    for (std::size_t d = 1; d <= std::min(dist.max_degree(), k); ++d) q += m * dist(d) * ripple_add_prob(d, L, R, k);
    return q;
}

// Balls into bins: m flows each released with probability r(L) land in one
// of L unprocessed channels; counts the non-ripple bins that get hit.
inline double expected_added_overlap(const PathLengthDistribution& dist, double m, std::size_t L, double R, std::size_t k)
{
    if (L == 0) return 0;
    double LL = static_cast<double>(L);
    double free = std::max(0.0, LL - R);
    if (free == 0) return 0;
    double r = 0;
    for (std::size_t d = 1; d <= std::min(dist.max_degree(), k); ++d) r += dist(d) * release_prob(d, L, k);
    double miss = std::pow(std::max(0.0, 1.0 - r / LL), m);
    return free * (1.0 - miss);
}

enum class AdditionModel { Overlap, Naive };

struct RipplePoint {
    std::size_t unprocessed; // L
    double ripple;           // R(L)
};

struct RipplePrediction {
    std::size_t k = 0;
    double m = 0;
    std::vector<RipplePoint> points; // L = k down to 1
    std::optional<std::size_t> stalled_at; // L at which the predicted ripple reached 0

    double at(std::size_t L) const
    {
        if (L < 1 || L > k) throw InvalidInput("L outside 1..k");
        return points[k - L].ripple;
    }
};

// R(k) is the expected number of degree-1 flows (capped at k); afterwards
// R(L) = R(L+1) - 1 + Q(L) with Q evaluated at the previous ripple R(L+1).
// Once the ripple is empty the process stops and the rest stays at 0.
inline RipplePrediction predict_ripple(const PathLengthDistribution& dist, double m, std::size_t k,
                                       AdditionModel model = AdditionModel::Overlap)
{
    if (k == 0) throw InvalidInput("channel count must be positive");
    if (!(m >= 0)) throw InvalidInput("flow count must be non-negative");
    RipplePrediction out;
    out.k = k;
    out.m = m;
    out.points.reserve(k);
    double R = std::min(m * dist(1), static_cast<double>(k));
    out.points.push_back({k, R});
    if (R <= 0) out.stalled_at = k;
    for (std::size_t L = k - 1; L >= 1; --L) {
        if (!out.stalled_at) {
            double q = model == AdditionModel::Overlap ? expected_added_overlap(dist, m, L, R, k)
                                                       : expected_added_naive(dist, m, L, R, k);
            R = std::clamp(R - 1 + q, 0.0, static_cast<double>(L));
            if (R <= 0) out.stalled_at = L;
        } else {
            R = 0;
        }
        out.points.push_back({L, R});
    }
    return out;
}

struct IidPeelingStats {
    std::size_t k = 0;
    std::size_t m = 0;
    std::size_t trials = 0;
    std::size_t successes = 0;
    std::vector<double> mean; // indexed by L = 0..k
    std::vector<double> sd;

    double success_rate() const { return trials ? static_cast<double>(successes) / static_cast<double>(trials) : 0.0; }
};

namespace detail {

// One LT-style peel over k single-unit channels. Fills ripple[L] for every L
// reached; returns true when all channels got processed.
template <class Rng>
bool iid_peel_once(const PathLengthDistribution& dist, std::size_t m, std::size_t k, Rng& rng, std::vector<double>& ripple)
{
    ripple.assign(k + 1, 0.0);
    std::discrete_distribution<std::size_t> degree_of(dist.probabilities().begin(), dist.probabilities().end());
    std::vector<std::vector<ChannelId>> flows(m);
    std::vector<std::vector<std::uint32_t>> users(k);
    std::uniform_int_distribution<ChannelId> any(0, static_cast<ChannelId>(k - 1));
    for (std::size_t f = 0; f < m; ++f) {
        std::size_t d = degree_of(rng) + 1;
        auto& hops = flows[f];
        while (hops.size() < d) {
            ChannelId c = any(rng);
            if (std::find(hops.begin(), hops.end(), c) == hops.end()) hops.push_back(c);
        }
        for (ChannelId c : hops) users[c].push_back(static_cast<std::uint32_t>(f));
    }
    std::vector<std::size_t> degree(m);
    std::vector<char> processed(k, 0);
    Ripple r(k);
    for (std::size_t f = 0; f < m; ++f) {
        degree[f] = flows[f].size();
        if (degree[f] == 1) r.insert(flows[f][0]);
    }
    std::size_t L = k;
    ripple[L] = static_cast<double>(r.size());
    while (!r.empty()) {
        ChannelId c = r.pop_random(rng);
        processed[c] = 1;
        --L;
        for (std::uint32_t f : users[c]) {
            if (degree[f] == 0) continue;
            if (--degree[f] == 1)
                for (ChannelId h : flows[f])
                    if (!processed[h]) {
                        r.insert(h);
                        break;
                    }
        }
        ripple[L] = static_cast<double>(r.size());
    }
    return L == 0;
}

} // namespace detail

// Monte Carlo over i.i.d. bipartite graphs: each flow draws its degree from
// Omega and that many distinct channels uniformly. Channels are single units.
inline IidPeelingStats simulate_iid_peeling(const PathLengthDistribution& dist, std::size_t m, std::size_t k,
                                            std::uint64_t seed, std::size_t trials, unsigned threads = 1)
{
    if (k == 0) throw InvalidInput("channel count must be positive");
    if (m > 0 && dist.max_degree() == 0) throw InvalidInput("empty path length distribution");
    if (dist.max_degree() > k) throw InvalidInput("path length distribution has mass beyond k = " + std::to_string(k));
    IidPeelingStats st;
    st.k = k;
    st.m = m;
    st.trials = trials;
    std::vector<std::vector<double>> traces(trials);
    std::vector<char> ok(trials, 0);
    parallel_for(trials, threads, [&](std::size_t t) {
        std::mt19937_64 rng(derive_seed(seed, t));
        ok[t] = detail::iid_peel_once(dist, m, k, rng, traces[t]);
    });
    st.mean.assign(k + 1, 0.0);
    st.sd.assign(k + 1, 0.0);
    for (std::size_t t = 0; t < trials; ++t) {
        st.successes += ok[t] != 0;
        for (std::size_t L = 0; L <= k; ++L) st.mean[L] += traces[t][L];
    }
    if (trials == 0) return st;
    for (auto& x : st.mean) x /= static_cast<double>(trials);
    if (trials > 1) {
        for (std::size_t t = 0; t < trials; ++t)
            for (std::size_t L = 0; L <= k; ++L) st.sd[L] += (traces[t][L] - st.mean[L]) * (traces[t][L] - st.mean[L]);
        for (auto& x : st.sd) x = std::sqrt(x / static_cast<double>(trials - 1));
    }
    return st;
}

// Columns: L,predicted,empirical_mean,empirical_sd (empirical columns empty
// when no simulation is given).
inline void write_prediction_csv(std::ostream& out, const RipplePrediction& p, const IidPeelingStats* sim = nullptr)
{
    out << "L,predicted,empirical_mean,empirical_sd\n";
    auto old = out.precision(10);
    for (const auto& pt : p.points) {
        out << pt.unprocessed << ',' << pt.ripple << ',';
        if (sim && pt.unprocessed < sim->mean.size()) out << sim->mean[pt.unprocessed] << ',' << sim->sd[pt.unprocessed];
        else out << ',';
        out << '\n';
    }
    out.precision(old);
}

} // namespace creditnet

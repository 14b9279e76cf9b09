#pragma once

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <numeric>
#include <ostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "creditnet/lt_analysis.hpp"
#include "creditnet/network.hpp"
#include "creditnet/parallel.hpp"
#include "creditnet/topology.hpp"

namespace creditnet {

struct SynthesisTarget {
    std::size_t k = 1500;       // channels
    std::size_t n = 300;        // nodes
    double m = 3000;            // flows
    std::size_t p_max = 10;     // longest path
    std::size_t d_max = 10;     // node degree bound for the distribution stage
    std::size_t jdd_d_max = 20; // node degree bound for the joint-degree stage
    double c1 = 1.7;
    double c2 = 2.5;

    double average_degree() const { return 2.0 * static_cast<double>(k) / static_cast<double>(n); }

    void validate() const
    {
        if (k == 0 || n < 2 || !(m > 0)) throw InvalidInput("synthesis budgets must be positive (k, m > 0, n >= 2)");
        if (p_max < 2) throw InvalidInput("p_max must be at least 2");
        if (d_max < 2 || jdd_d_max < 2) throw InvalidInput("degree bounds must be at least 2");
        if (!(c1 > 0) || !(c2 > 0)) throw InvalidInput("ripple curve constants must be positive");
    }
};

// R(L) = min(c1 L^(1/c2), L).
inline double target_ripple(double L, double c1 = 1.7, double c2 = 2.5)
{
    if (L <= 0) return 0;
    return std::min(c1 * std::pow(L, 1.0 / c2), L);
}

// Desired additions: R(k) at the start, R(L) - R(L+1) + 1 afterwards.
inline double target_additions(std::size_t L, std::size_t k, double c1 = 1.7, double c2 = 2.5)
{
    if (L > k) throw InvalidInput("L exceeds k");
    double LL = static_cast<double>(L);
    if (L == k) return target_ripple(LL, c1, c2);
    return target_ripple(LL, c1, c2) - target_ripple(LL + 1, c1, c2) + 1;
}

// Row i is L = k - i; column j is degree d = j + 1. The ripple before the
// first step is empty, so the top row only has the degree-1 start case.
inline Eigen::MatrixXd build_design_matrix(std::size_t k, std::size_t columns, double c1 = 1.7, double c2 = 2.5)
{
    columns = std::min(columns, k);
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(columns));
    for (std::size_t i = 0; i < k; ++i) {
        std::size_t L = k - i;
        double prev = L == k ? 0.0 : target_ripple(static_cast<double>(L + 1), c1, c2);
        for (std::size_t d = 1; d <= columns; ++d)
            A(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(d - 1)) = ripple_add_prob(d, L, prev, k);
    }
    return A;
}

inline Eigen::VectorXd build_target_vector(std::size_t k, double c1 = 1.7, double c2 = 2.5)
{
    Eigen::VectorXd b(static_cast<Eigen::Index>(k));
    for (std::size_t i = 0; i < k; ++i) b(static_cast<Eigen::Index>(i)) = target_additions(k - i, k, c1, c2);
    return b;
}

// Polytope for the flow counts x_1..x_p (p = min(p_max, k)).
struct DistributionConstraints {
    double total = 0;            // 1'x = m
    std::vector<double> upper;   // 0 <= x_i <= upper_i
    // x_2 >= x_3 >= ... >= x_p

    std::size_t size() const noexcept { return upper.size(); }

    double max_violation(const std::vector<double>& x) const
    {
        double v = std::abs(std::accumulate(x.begin(), x.end(), 0.0) - total);
        for (std::size_t i = 0; i < x.size(); ++i) v = std::max({v, -x[i], x[i] - upper[i]});
        for (std::size_t i = 2; i < x.size(); ++i) v = std::max(v, x[i] - x[i - 1]);
        return v;
    }
};

inline DistributionConstraints distribution_constraints(const SynthesisTarget& t)
{
    t.validate();
    std::size_t p = std::min(t.p_max, t.k);
    double n = static_cast<double>(t.n), k = static_cast<double>(t.k);
    DistributionConstraints c;
    c.total = t.m;
    for (std::size_t i = 1; i <= p; ++i) {
        double reach = std::pow(static_cast<double>(t.d_max), static_cast<double>(i)) * t.m / n;
        c.upper.push_back(std::min(reach, t.m));
    }
    c.upper[0] = std::min(c.upper[0], 2.0 * k * t.m / (n * (n - 1)));
    // the largest total the box and the ordering allow together
    double cap = c.upper[0], run = p > 1 ? c.upper[1] : 0.0;
    for (std::size_t i = 1; i < p; ++i) {
        run = std::min(run, c.upper[i]);
        cap += run;
    }
    if (cap < t.m * (1 - 1e-12)) {
        std::ostringstream msg;
        msg << "constraints admit at most " << cap << " flows but m = " << t.m
            << " (binding: per-length caps d_max^i m/n with p_max = " << t.p_max << ", length-1 cap 2km/(n(n-1)))";
        throw InvalidInput(msg.str());
    }
    return c;
}

namespace detail {

// Non-increasing least-squares fit (pool adjacent violators) on x[from..].
inline void project_nonincreasing(std::vector<double>& x, std::size_t from)
{
    if (x.size() <= from + 1) return;
    std::vector<double> value, weight;
    std::vector<std::size_t> len;
    for (std::size_t i = from; i < x.size(); ++i) {
        value.push_back(x[i]);
        weight.push_back(1);
        len.push_back(1);
        while (value.size() > 1 && value[value.size() - 2] < value.back()) {
            double w = weight[weight.size() - 2] + weight.back();
            double v = (value[value.size() - 2] * weight[weight.size() - 2] + value.back() * weight.back()) / w;
            std::size_t l = len[len.size() - 2] + len.back();
            value.pop_back(), weight.pop_back(), len.pop_back();
            value.back() = v, weight.back() = w, len.back() = l;
        }
    }
    std::size_t i = from;
    for (std::size_t b = 0; b < value.size(); ++b)
        for (std::size_t r = 0; r < len[b]; ++r) x[i++] = value[b];
}

// Dykstra's alternating projections onto box, hyperplane and ordering cone.
inline std::vector<double> project_constraints(const DistributionConstraints& c, std::vector<double> y,
                                               double tol, std::size_t max_rounds = 200000)
{
    std::size_t p = c.size();
    std::vector<double> pb(p, 0.0), ph(p, 0.0), pm(p, 0.0), x = y, t(p);
    for (std::size_t round = 0; round < max_rounds; ++round) {
        for (std::size_t i = 0; i < p; ++i) t[i] = std::clamp(x[i] + pb[i], 0.0, c.upper[i]);
        for (std::size_t i = 0; i < p; ++i) pb[i] = x[i] + pb[i] - t[i];
        std::vector<double> h(p);
        double shift = c.total;
        for (std::size_t i = 0; i < p; ++i) shift -= t[i] + ph[i];
        shift /= static_cast<double>(p);
        for (std::size_t i = 0; i < p; ++i) h[i] = t[i] + ph[i] + shift;
        for (std::size_t i = 0; i < p; ++i) ph[i] = t[i] + ph[i] - h[i];
        std::vector<double> z(p);
        for (std::size_t i = 0; i < p; ++i) z[i] = h[i] + pm[i];
        project_nonincreasing(z, 1);
        for (std::size_t i = 0; i < p; ++i) pm[i] = h[i] + pm[i] - z[i];
        double change = 0;
        for (std::size_t i = 0; i < p; ++i) change = std::max(change, std::abs(z[i] - x[i]));
        x = std::move(z);
        if (change <= tol && c.max_violation(x) <= tol) break;
    }
    return x;
}

} // namespace detail

struct FitOptions {
    std::size_t max_iterations = 200000;
    std::size_t window = 100;     // convergence window
    double rel_change = 1e-8;     // relative objective change over the window
};

struct DistributionFit {
    PathLengthDistribution dist;
    std::vector<double> counts;           // x = m Omega
    double m = 0;
    double residual = 0;                  // ||Ax - b||_2
    std::vector<double> residual_history; // one entry per iteration
    double max_violation = 0;             // of the constraint set, in flows
    std::size_t iterations = 0;
    bool converged = false;
};

// Projected gradient on 0.5 ||Ax - b||^2 over the constraint polytope.
inline DistributionFit optimize_path_length_dist(const SynthesisTarget& target, const FitOptions& opt = {})
{
    auto cons = distribution_constraints(target);
    std::size_t p = cons.size();
    Eigen::MatrixXd A = build_design_matrix(target.k, p, target.c1, target.c2);
    Eigen::VectorXd b = build_target_vector(target.k, target.c1, target.c2);
    Eigen::MatrixXd G = A.transpose() * A;
    Eigen::VectorXd h = A.transpose() * b;
    double lip = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(G).eigenvalues().maxCoeff();
    double step = lip > 0 ? 1.0 / lip : 1.0;
    double tol = 1e-13 * std::max(1.0, target.m);

    auto residual = [&](const std::vector<double>& x) {
        Eigen::Map<const Eigen::VectorXd> xv(x.data(), static_cast<Eigen::Index>(p));
        return (A * xv - b).norm();
    };

    std::vector<double> x(p, target.m / static_cast<double>(p));
    x = detail::project_constraints(cons, x, tol);
    DistributionFit fit;
    fit.residual_history.push_back(residual(x));
    for (std::size_t it = 1; it <= opt.max_iterations; ++it) {
        Eigen::Map<const Eigen::VectorXd> xv(x.data(), static_cast<Eigen::Index>(p));
        Eigen::VectorXd g = G * xv - h;
        std::vector<double> y(p);
        for (std::size_t i = 0; i < p; ++i) y[i] = x[i] - step * g(static_cast<Eigen::Index>(i));
        x = detail::project_constraints(cons, std::move(y), tol);
        fit.residual_history.push_back(residual(x));
        fit.iterations = it;
        if (it >= opt.window) {
            double now = fit.residual_history.back(), then = fit.residual_history[it - opt.window];
            double f_now = now * now, f_then = then * then;
            if (std::abs(f_then - f_now) <= opt.rel_change * std::max(f_now, 1e-300)) {
                fit.converged = true;
                break;
            }
        }
    }
    for (auto& v : x) v = std::max(v, 0.0);
    fit.counts = x;
    fit.m = target.m;
    fit.residual = fit.residual_history.back();
    fit.max_violation = cons.max_violation(x);
    fit.dist = PathLengthDistribution::from_weights(x);
    return fit;
}

// Golden-section search over the flow count m in [m_lo, m_hi] minimizing
// the fit residual; the constraints are rebuilt for every m.
inline DistributionFit optimize_flow_count(SynthesisTarget target, double m_lo, double m_hi, std::size_t rounds = 25,
                                           const FitOptions& opt = {})
{
    if (!(m_lo > 0) || !(m_hi > m_lo)) throw InvalidInput("need 0 < m_lo < m_hi");
    const double phi = (std::sqrt(5.0) - 1) / 2;
    auto eval = [&](double m) {
        target.m = m;
        return optimize_path_length_dist(target, opt);
    };
    double a = m_lo, b = m_hi;
    double c = b - phi * (b - a), d = a + phi * (b - a);
    auto fc = eval(c), fd = eval(d);
    for (std::size_t r = 0; r < rounds; ++r) {
        if (fc.residual <= fd.residual) {
            b = d, d = c, fd = std::move(fc);
            c = b - phi * (b - a);
            fc = eval(c);
        } else {
            a = c, c = d, fc = std::move(fd);
            d = a + phi * (b - a);
            fd = eval(d);
        }
    }
    return fc.residual <= fd.residual ? fc : fd;
}

// Probability that a random edge joins degrees {j, l}; stored once per
// unordered pair (j <= l), degrees 1..max_degree.
class JointDegreeDistribution {
public:
    JointDegreeDistribution() = default;
    explicit JointDegreeDistribution(std::size_t max_degree)
        : dmax_(max_degree), mass_(max_degree * (max_degree + 1) / 2, 0.0)
    {
    }

    std::size_t max_degree() const noexcept { return dmax_; }
    std::size_t cell_count() const noexcept { return mass_.size(); }

    double operator()(std::size_t j, std::size_t l) const { return mass_[index(j, l)]; }
    void set(std::size_t j, std::size_t l, double v) { mass_[index(j, l)] = v; }
    double& cell(std::size_t c) { return mass_[c]; }
    std::size_t cell_index(std::size_t j, std::size_t l) const { return index(j, l); }
    double cell(std::size_t c) const { return mass_[c]; }

    std::pair<std::size_t, std::size_t> cell_degrees(std::size_t c) const
    {
        for (std::size_t j = 1; j <= dmax_; ++j) {
            std::size_t row = dmax_ - j + 1;
            if (c < row) return {j, j + c};
            c -= row;
        }
        throw InvalidInput("cell index out of range");
    }

    void validate() const
    {
        double total = 0;
        for (double v : mass_) {
            if (!(v >= 0)) throw InvalidInput("joint degree mass must be non-negative");
            total += v;
        }
        if (std::abs(total - 1) > 1e-9) throw InvalidInput("joint degree mass sums to " + std::to_string(total));
    }

    void normalize()
    {
        double total = std::accumulate(mass_.begin(), mass_.end(), 0.0);
        if (!(total > 0)) throw InvalidInput("joint degree mass is zero");
        for (auto& v : mass_) v /= total;
    }

    // Stub share of degree class j per edge: 2 e(j,j) + sum_{l != j} e(j,l).
    std::vector<double> stub_share() const
    {
        std::vector<double> s(dmax_ + 1, 0.0);
        for (std::size_t j = 1; j <= dmax_; ++j)
            for (std::size_t l = j; l <= dmax_; ++l) {
                double v = (*this)(j, l);
                s[j] += v;
                s[l] += v;
            }
        return s;
    }

    // Nodes per degree class implied by `edges` edges (real valued).
    std::vector<double> implied_nodes(double edges) const
    {
        auto s = stub_share();
        std::vector<double> n(dmax_ + 1, 0.0);
        for (std::size_t j = 1; j <= dmax_; ++j) n[j] = edges * s[j] / static_cast<double>(j);
        return n;
    }

    // Degree classes joined by positive-mass cells form one group; otherwise
    // every realization splits along class lines.
    bool classes_connected() const
    {
        std::vector<std::size_t> root(dmax_ + 1);
        std::iota(root.begin(), root.end(), 0);
        auto find = [&](std::size_t x) {
            while (root[x] != x) x = root[x] = root[root[x]];
            return x;
        };
        std::vector<bool> used(dmax_ + 1, false);
        for (std::size_t j = 1; j <= dmax_; ++j)
            for (std::size_t l = j; l <= dmax_; ++l)
                if ((*this)(j, l) > 0) {
                    used[j] = used[l] = true;
                    root[find(j)] = find(l);
                }
        std::size_t groups = 0;
        for (std::size_t j = 1; j <= dmax_; ++j) groups += used[j] && find(j) == j;
        return groups == 1;
    }

    double average_degree() const
    {
        auto n = implied_nodes(1.0);
        double nodes = std::accumulate(n.begin(), n.end(), 0.0);
        return nodes > 0 ? 2.0 / nodes : 0.0;
    }

    static JointDegreeDistribution from_graph(const CreditNetwork& net, std::size_t max_degree = 0)
    {
        std::size_t top = 1;
        for (NodeId v = 0; v < net.node_count(); ++v) top = std::max(top, net.neighbors(v).size());
        if (max_degree == 0) max_degree = top;
        if (top > max_degree) throw InvalidInput("graph degree " + std::to_string(top) + " exceeds the JDD bound");
        JointDegreeDistribution j(max_degree);
        for (std::size_t k = 0; k < net.edge_count(); ++k) {
            const auto& e = net.edge(k);
            std::size_t a = net.neighbors(e.u).size(), b = net.neighbors(e.v).size();
            j.mass_[j.index(a, b)] += 1;
        }
        j.normalize();
        return j;
    }

    friend bool operator==(const JointDegreeDistribution&, const JointDegreeDistribution&) = default;

private:
    std::size_t index(std::size_t j, std::size_t l) const
    {
        if (j > l) std::swap(j, l);
        if (j < 1 || l > dmax_) throw InvalidInput("degree pair outside 1.." + std::to_string(dmax_));
        // rows j = 1..dmax hold l = j..dmax
        return (j - 1) * dmax_ - (j - 1) * (j - 2) / 2 + (l - j);
    }

    std::size_t dmax_ = 0;
    std::vector<double> mass_;
};

// Triangular CSV: j,l,probability with j <= l, zero cells omitted.
inline void write_jdd_csv(std::ostream& out, const JointDegreeDistribution& jdd)
{
    out << "j,l,probability\n";
    auto old = out.precision(17);
    for (std::size_t j = 1; j <= jdd.max_degree(); ++j)
        for (std::size_t l = j; l <= jdd.max_degree(); ++l)
            if (jdd(j, l) > 0) out << j << ',' << l << ',' << jdd(j, l) << '\n';
    out.precision(old);
}

inline JointDegreeDistribution read_jdd_csv(std::istream& in)
{
    std::vector<std::tuple<std::size_t, std::size_t, double>> cells;
    std::size_t top = 1, line_no = 0;
    std::string line;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        if (line_no == 1 && line.find_first_not_of("0123456789.,-+eE \t\r") != std::string::npos) continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ls(line);
        long j = 0, l = 0;
        double p = 0;
        if (!(ls >> j >> l >> p) || j < 1 || l < 1 || p < 0)
            throw InvalidInput("line " + std::to_string(line_no) + ": expected j,l,probability");
        cells.emplace_back(static_cast<std::size_t>(j), static_cast<std::size_t>(l), p);
        top = std::max<std::size_t>(top, static_cast<std::size_t>(std::max(j, l)));
    }
    JointDegreeDistribution jdd(top);
    for (auto [j, l, p] : cells) jdd.set(j, l, jdd(j, l) + p);
    double total = 0;
    for (std::size_t c = 0; c < jdd.cell_count(); ++c) total += jdd.cell(c);
    if (std::abs(total - 1) > 1e-6) throw InvalidInput("joint degree probabilities sum to " + std::to_string(total));
    jdd.normalize();
    return jdd;
}

inline JointDegreeDistribution load_jdd_csv(const std::string& file)
{
    std::ifstream in(file);
    if (!in) throw InvalidInput("cannot open JDD file '" + file + "'");
    return read_jdd_csv(in);
}

// Node count per degree class and edge count per class pair.
struct JointDegreeSequence {
    std::size_t max_degree = 0;
    std::vector<std::size_t> nodes;               // nodes[j]
    std::vector<std::vector<std::size_t>> edges;  // edges[j][l], symmetric

    explicit JointDegreeSequence(std::size_t dmax = 0)
        : max_degree(dmax), nodes(dmax + 1, 0), edges(dmax + 1, std::vector<std::size_t>(dmax + 1, 0))
    {
    }

    void add_edges(std::size_t j, std::size_t l, std::size_t count)
    {
        edges[j][l] += count;
        if (j != l) edges[l][j] += count;
    }

    std::size_t stubs(std::size_t j) const
    {
        std::size_t s = 0;
        for (std::size_t l = 1; l <= max_degree; ++l) s += l == j ? 2 * edges[j][j] : edges[j][l];
        return s;
    }

    std::size_t node_total() const { return std::accumulate(nodes.begin(), nodes.end(), std::size_t{0}); }

    std::size_t edge_total() const
    {
        std::size_t e = 0;
        for (std::size_t j = 1; j <= max_degree; ++j)
            for (std::size_t l = j; l <= max_degree; ++l) e += edges[j][l];
        return e;
    }
};

struct JddValidation {
    bool valid = true;
    std::vector<std::string> reasons;
};

// Stub counts must equal j n_j; class pairs fit within n_j n_l edges
// (n_j choose 2 inside a class).
inline JddValidation validate_jdd_sequence(const JointDegreeSequence& s)
{
    JddValidation v;
    auto fail = [&](std::string r) {
        v.valid = false;
        v.reasons.push_back(std::move(r));
    };
    for (std::size_t j = 1; j <= s.max_degree; ++j) {
        if (s.stubs(j) != j * s.nodes[j])
            fail("degree " + std::to_string(j) + ": " + std::to_string(s.stubs(j)) + " edge ends for " +
                 std::to_string(s.nodes[j]) + " nodes");
        for (std::size_t l = j; l <= s.max_degree; ++l) {
            std::size_t e = s.edges[j][l];
            if (s.edges[l][j] != e) fail("edge counts for (" + std::to_string(j) + "," + std::to_string(l) + ") not symmetric");
            std::size_t cap = j == l ? s.nodes[j] * (s.nodes[j] - (s.nodes[j] > 0 ? 1 : 0)) / 2 : s.nodes[j] * s.nodes[l];
            if (e > cap)
                fail("class pair (" + std::to_string(j) + "," + std::to_string(l) + ") needs " + std::to_string(e) +
                     " edges but at most " + std::to_string(cap) + " fit");
        }
    }
    return v;
}

// Adds the fewest edges it can so every class's stub count is a multiple of
// its degree and every class pair fits. Deficits are paired across classes
// first, then inside a class, then against degree-1 nodes.
inline void patch_jdd_sequence(JointDegreeSequence& s)
{
    std::size_t D = s.max_degree;
    auto deficit = [&](std::size_t j) { return (j - s.stubs(j) % j) % j; };
    for (std::size_t guard = 0; guard < 100000; ++guard) {
        std::size_t worst = 0, wd = 0;
        for (std::size_t j = 2; j <= D; ++j)
            if (deficit(j) > wd) wd = deficit(j), worst = j;
        if (worst == 0) break;
        std::size_t partner = 0, pd = 0;
        for (std::size_t l = 2; l <= D; ++l)
            if (l != worst && deficit(l) > pd) pd = deficit(l), partner = l;
        if (partner) s.add_edges(worst, partner, 1);
        else if (wd >= 2) s.add_edges(worst, worst, 1);
        else s.add_edges(worst, 1, 1);
    }
    for (std::size_t j = 1; j <= D; ++j) s.nodes[j] = s.stubs(j) / j;
    // a class too small for its edges gains whole nodes wired to degree-1 leaves
    for (std::size_t guard = 0; guard < 100000; ++guard) {
        bool changed = false;
        for (std::size_t j = 2; j <= D && !changed; ++j)
            for (std::size_t l = j; l <= D && !changed; ++l) {
                std::size_t e = s.edges[j][l];
                std::size_t cap = j == l ? s.nodes[j] * (s.nodes[j] - (s.nodes[j] > 0 ? 1 : 0)) / 2 : s.nodes[j] * s.nodes[l];
                if (e <= cap) continue;
                std::size_t grow = (j == l || s.nodes[j] <= s.nodes[l]) ? j : l;
                s.add_edges(grow, 1, grow);
                s.nodes[grow] += 1;
                changed = true;
            }
        s.nodes[1] = s.stubs(1);
        if (!changed) break;
    }
    if (D >= 1) s.nodes[1] = s.stubs(1);
}

// Multinomial draw of k edges over the JDD cells, then patched.
template <class Rng>
JointDegreeSequence sample_jdd_sequence(const JointDegreeDistribution& jdd, std::size_t k, Rng& rng)
{
    jdd.validate();
    JointDegreeSequence s(jdd.max_degree());
    std::vector<double> w(jdd.cell_count());
    for (std::size_t c = 0; c < w.size(); ++c) w[c] = jdd.cell(c);
    std::discrete_distribution<std::size_t> pick(w.begin(), w.end());
    for (std::size_t e = 0; e < k; ++e) {
        auto [j, l] = jdd.cell_degrees(pick(rng));
        s.add_edges(j, l, 1);
    }
    patch_jdd_sequence(s);
    return s;
}

namespace detail {

struct UEdge {
    NodeId a, b;
};

// Simple-graph bookkeeping for degree-preserving swaps inside one class pair.
class PairRealizer {
public:
    explicit PairRealizer(bool same) : same_(same) {}

    std::vector<UEdge> edges;

    void add(NodeId a, NodeId b)
    {
        edges.push_back({a, b});
        ++count_[ordered(a, b)];
    }

    bool bad(std::size_t i) const { return edges[i].a == edges[i].b || count_.at(ordered(edges[i].a, edges[i].b)) > 1; }

    // Swaps the far ends of edges i and o; `cross` picks the other pairing
    // when both ends come from the same class. Applies only if it fixes or
    // keeps simplicity for the new edges.
    bool try_swap(std::size_t i, std::size_t o, bool cross)
    {
        if (i == o) return false;
        UEdge e1 = edges[i], e2 = edges[o];
        if (same_ && cross) std::swap(e2.a, e2.b);
        UEdge n1{e1.a, e2.b}, n2{e2.a, e1.b};
        if (n1.a == n1.b || n2.a == n2.b || ordered(n1.a, n1.b) == ordered(n2.a, n2.b)) return false;
        if (count_.count(ordered(n1.a, n1.b)) || count_.count(ordered(n2.a, n2.b))) return false;
        drop(edges[i]);
        drop(edges[o]);
        edges[i] = n1;
        edges[o] = n2;
        ++count_[ordered(n1.a, n1.b)];
        ++count_[ordered(n2.a, n2.b)];
        return true;
    }

private:
    void drop(const UEdge& e)
    {
        auto it = count_.find(ordered(e.a, e.b));
        if (--it->second == 0) count_.erase(it);
    }

    bool same_;
    std::map<std::pair<NodeId, NodeId>, std::size_t> count_;
};

// Havel-Hakimi style construction from per-node stub counts; nullopt when
// the counts are not realizable as a simple (bipartite) graph.
inline std::optional<std::vector<UEdge>> greedy_class_pair(const std::vector<NodeId>& left, const std::vector<NodeId>& right,
                                                           bool same)
{
    std::map<NodeId, std::size_t> dl, dr;
    for (NodeId v : left) ++dl[v];
    for (NodeId v : right) ++dr[v];
    std::vector<UEdge> out;
    if (same) {
        for (;;) {
            std::vector<std::pair<std::size_t, NodeId>> order;
            for (auto [v, d] : dl)
                if (d > 0) order.emplace_back(d, v);
            if (order.empty()) return out;
            std::sort(order.rbegin(), order.rend());
            auto [d, v] = order.front();
            if (d >= order.size()) return std::nullopt;
            dl[v] = 0;
            for (std::size_t i = 1; i <= d; ++i) {
                out.push_back({v, order[i].second});
                --dl[order[i].second];
            }
        }
    }
    std::vector<std::pair<std::size_t, NodeId>> lo;
    for (auto [v, d] : dl) lo.emplace_back(d, v);
    std::sort(lo.rbegin(), lo.rend());
    for (auto [d, v] : lo) {
        std::vector<std::pair<std::size_t, NodeId>> ro;
        for (auto [w, r] : dr)
            if (r > 0) ro.emplace_back(r, w);
        if (ro.size() < d) return std::nullopt;
        std::sort(ro.rbegin(), ro.rend());
        for (std::size_t i = 0; i < d; ++i) {
            out.push_back({v, ro[i].second});
            --dr[ro[i].second];
        }
    }
    return out;
}

// One class pair: random stub matching repaired by swaps, falling back to
// the greedy construction (then shuffled by swaps) when repair stalls.
template <class Rng>
std::vector<UEdge> realize_class_pair(std::vector<NodeId> left, std::vector<NodeId> right, bool same, Rng& rng,
                                      std::size_t budget)
{
    PairRealizer r(same);
    if (same) {
        std::shuffle(left.begin(), left.end(), rng);
        for (std::size_t i = 0; i + 1 < left.size(); i += 2) r.add(left[i], left[i + 1]);
    } else {
        std::shuffle(right.begin(), right.end(), rng);
        for (std::size_t i = 0; i < left.size(); ++i) r.add(left[i], right[i]);
    }
    if (r.edges.empty()) return {};
    std::uniform_int_distribution<std::size_t> any(0, r.edges.size() - 1);
    std::bernoulli_distribution coin(0.5);
    // a successful swap never creates a loop or repeat, so one pass suffices
    bool stuck = false;
    for (std::size_t i = 0; i < r.edges.size() && !stuck; ++i)
        while (r.bad(i)) {
            if (budget == 0) {
                stuck = true;
                break;
            }
            --budget;
            r.try_swap(i, any(rng), coin(rng));
        }
    if (!stuck) return r.edges;
    auto greedy = greedy_class_pair(left, right, same);
    if (!greedy) throw LimitExceeded("a degree class pair cannot be wired as a simple graph");
    PairRealizer g(same);
    for (const auto& e : *greedy) g.add(e.a, e.b);
    std::uniform_int_distribution<std::size_t> pick(0, g.edges.size() - 1);
    for (std::size_t t = 0; t < 10 * g.edges.size(); ++t) g.try_swap(pick(rng), pick(rng), coin(rng));
    return g.edges;
}

// Balanced per-node stub allocation inside each degree class, then each
// class pair is wired on its own (repeated edges can only occur inside one).
template <class Rng>
std::vector<UEdge> realize_jdd_sequence(const JointDegreeSequence& s, Rng& rng, std::size_t swap_budget)
{
    std::size_t D = s.max_degree;
    std::vector<std::vector<NodeId>> members(D + 1);
    NodeId next = 0;
    for (std::size_t j = 1; j <= D; ++j)
        for (std::size_t i = 0; i < s.nodes[j]; ++i) members[j].push_back(next++);
    // stubs[j][l]: one class-j node per stub pointing at class l
    std::vector<std::vector<std::vector<NodeId>>> stubs(D + 1, std::vector<std::vector<NodeId>>(D + 1));
    for (std::size_t j = 1; j <= D; ++j) {
        if (members[j].empty()) continue;
        std::size_t cursor = 0, placed = 0;
        for (std::size_t l = 1; l <= D; ++l) {
            std::size_t want = l == j ? 2 * s.edges[j][j] : s.edges[j][l];
            for (std::size_t t = 0; t < want; ++t, ++placed) {
                if (placed >= j * members[j].size()) throw InvalidInput("joint degree sequence has more stubs than nodes allow");
                stubs[j][l].push_back(members[j][cursor]);
                cursor = (cursor + 1) % members[j].size();
            }
        }
    }
    std::vector<UEdge> edges;
    for (std::size_t j = 1; j <= D; ++j)
        for (std::size_t l = j; l <= D; ++l) {
            std::size_t e = s.edges[j][l];
            if (e == 0) continue;
            auto part = realize_class_pair(stubs[j][l], j == l ? std::vector<NodeId>{} : stubs[l][j], j == l, rng,
                                           std::max<std::size_t>(swap_budget * e / std::max<std::size_t>(s.edge_total(), 1), 1000));
            edges.insert(edges.end(), part.begin(), part.end());
        }
    return edges;
}

} // namespace detail

struct SynthesisOptions {
    Tokens total_collateral = 100000;
    std::size_t swap_budget = 0; // 0 means 200 swaps per edge
    double min_component = 0.25; // smallest accepted share of nodes in the kept component
};

// Samples a joint degree sequence, realizes it as a simple graph and keeps
// the largest connected component.
inline CreditNetwork synthesize_graph(const JointDegreeDistribution& jdd, std::size_t n, std::size_t k, std::uint64_t seed,
                                      const SynthesisOptions& opt = {})
{
    if (n < 2 || k == 0) throw InvalidInput("synthesis needs n >= 2 and k >= 1");
    std::mt19937_64 rng(seed);
    auto seq = sample_jdd_sequence(jdd, k, rng);
    auto check = validate_jdd_sequence(seq);
    if (!check.valid) throw InvalidInput("joint degree sequence is not realizable: " + check.reasons.front());
    auto edges = detail::realize_jdd_sequence(seq, rng, opt.swap_budget ? opt.swap_budget : 200 * std::max<std::size_t>(k, 1));
    detail::EdgeSet es;
    for (const auto& e : edges) es.insert(detail::ordered(e.a, e.b));
    auto g = largest_component(detail::with_collateral(seq.node_total(), es, opt.total_collateral));
    if (static_cast<double>(g.node_count()) < opt.min_component * static_cast<double>(seq.node_total()))
        throw InvalidInput("joint degree distribution does not yield a connected graph (largest component " +
                           std::to_string(g.node_count()) + " of " + std::to_string(seq.node_total()) + " nodes)");
    return g;
}

struct PathLengthEstimate {
    PathLengthDistribution dist;
    std::vector<double> stderr_; // per length, index d - 1
    std::size_t samples = 0;
};

// Shortest-path length histogram over uniformly drawn ordered pairs (all
// pairs when demand_pairs == 0).
template <class Rng>
std::vector<double> shortest_length_histogram(const CreditNetwork& net, std::size_t demand_pairs, Rng& rng)
{
    std::size_t N = net.node_count();
    std::vector<double> h;
    if (N < 2) return h;
    std::vector<std::vector<NodeId>> targets(N);
    if (demand_pairs == 0) {
        for (NodeId s = 0; s < N; ++s)
            for (NodeId t = 0; t < N; ++t)
                if (s != t) targets[s].push_back(t);
    } else {
        std::uniform_int_distribution<NodeId> any(0, static_cast<NodeId>(N - 1));
        for (std::size_t i = 0; i < demand_pairs; ++i) {
            NodeId s = any(rng), t = any(rng);
            while (t == s) t = any(rng);
            targets[s].push_back(t);
        }
    }
    std::vector<long> dist(N);
    std::deque<NodeId> q;
    for (NodeId s = 0; s < N; ++s) {
        if (targets[s].empty()) continue;
        std::fill(dist.begin(), dist.end(), -1);
        dist[s] = 0;
        q.assign(1, s);
        while (!q.empty()) {
            NodeId x = q.front();
            q.pop_front();
            for (const auto& nb : net.neighbors(x))
                if (dist[nb.node] < 0) {
                    dist[nb.node] = dist[x] + 1;
                    q.push_back(nb.node);
                }
        }
        for (NodeId t : targets[s]) {
            if (dist[t] <= 0) continue;
            auto d = static_cast<std::size_t>(dist[t]);
            if (h.size() < d) h.resize(d, 0.0);
            h[d - 1] += 1;
        }
    }
    return h;
}

inline PathLengthEstimate estimate_plength_from_jdd(const JointDegreeDistribution& jdd, std::size_t n, std::size_t k,
                                                    std::size_t demand_pairs, std::size_t samples, std::uint64_t seed,
                                                    unsigned threads = 1)
{
    if (samples == 0) throw InvalidInput("need at least one sample");
    std::vector<std::vector<double>> per(samples);
    parallel_for(samples, threads, [&](std::size_t s) {
        std::uint64_t sd = derive_seed(seed, s);
        auto g = synthesize_graph(jdd, n, k, sd);
        std::mt19937_64 rng(derive_seed(sd, 1));
        auto h = shortest_length_histogram(g, demand_pairs, rng);
        double total = std::accumulate(h.begin(), h.end(), 0.0);
        if (total > 0)
            for (auto& x : h) x /= total;
        per[s] = std::move(h);
    });
    std::size_t len = 0;
    for (const auto& h : per) len = std::max(len, h.size());
    std::vector<double> mean(len, 0.0), se(len, 0.0);
    for (auto& h : per) {
        h.resize(len, 0.0);
        for (std::size_t i = 0; i < len; ++i) mean[i] += h[i] / static_cast<double>(samples);
    }
    if (samples > 1)
        for (std::size_t i = 0; i < len; ++i) {
            double v = 0;
            for (const auto& h : per) v += (h[i] - mean[i]) * (h[i] - mean[i]);
            se[i] = std::sqrt(v / static_cast<double>(samples - 1) / static_cast<double>(samples));
        }
    PathLengthEstimate out;
    out.dist = PathLengthDistribution::from_weights(mean);
    se.resize(out.dist.max_degree());
    out.stderr_ = std::move(se);
    out.samples = samples;
    return out;
}

inline double distribution_distance_l2(const PathLengthDistribution& a, const PathLengthDistribution& b)
{
    double s = 0;
    for (std::size_t d = 1; d <= std::max(a.max_degree(), b.max_degree()); ++d) s += (a(d) - b(d)) * (a(d) - b(d));
    return std::sqrt(s);
}

inline double distribution_distance_l1(const PathLengthDistribution& a, const PathLengthDistribution& b)
{
    double s = 0;
    for (std::size_t d = 1; d <= std::max(a.max_degree(), b.max_degree()); ++d) s += std::abs(a(d) - b(d));
    return s;
}

struct JddSearchOptions {
    std::size_t evaluations = 5000;
    std::size_t samples = 1;        // graphs per evaluation
    std::size_t demand_pairs = 0;   // 0 = all pairs
    double step = 0.01;             // mass moved per proposal
    double cooling = 0.95;          // per `cooling_every` proposals
    std::size_t cooling_every = 50;
    double initial_temperature = 0; // 0 = 5% of the starting distance
    double average_degree_slack = 0.05;
    double stop_distance = 0;       // stop early once reached
    double local_moves = 0.5;       // share of proposals to an adjacent cell
    unsigned threads = 1;
};

enum class SearchStatus { Converged, BudgetExhausted };

struct JddFit {
    JointDegreeDistribution jdd;
    double distance = 0; // l2 between the estimate and the target
    SearchStatus status = SearchStatus::BudgetExhausted;
    std::size_t evaluations = 0;
    std::size_t rejected_unrealizable = 0;
};

// Starting point: every edge between nodes of (about) the target average degree.
inline JointDegreeDistribution initial_jdd(const SynthesisTarget& t)
{
    double avg = std::clamp(t.average_degree(), 1.0, static_cast<double>(t.jdd_d_max));
    auto lo = static_cast<std::size_t>(std::floor(avg));
    std::size_t hi = std::min(lo + 1, t.jdd_d_max);
    JointDegreeDistribution j(t.jdd_d_max);
    double frac_hi = avg - static_cast<double>(lo);
    if (hi == lo || frac_hi == 0) {
        j.set(lo, lo, 1.0);
        return j;
    }
    // node fraction at degree hi is frac_hi; edges pair stubs at random
    double s_lo = (1 - frac_hi) * static_cast<double>(lo), s_hi = frac_hi * static_cast<double>(hi);
    double ss = s_lo + s_hi;
    j.set(lo, lo, (s_lo / ss) * (s_lo / ss));
    j.set(hi, hi, (s_hi / ss) * (s_hi / ss));
    j.set(lo, hi, 2 * (s_lo / ss) * (s_hi / ss));
    return j;
}

// Simulated annealing over JDD cells against a target path-length
// distribution, evaluated by Monte Carlo synthesis.
inline JddFit optimize_jdd(const PathLengthDistribution& target_dist, const SynthesisTarget& target, std::uint64_t seed,
                           const JddSearchOptions& opt = {}, std::optional<JointDegreeDistribution> start = std::nullopt)
{
    target.validate();
    std::mt19937_64 rng(seed);
    JointDegreeDistribution cur = start ? *start : initial_jdd(target);
    if (cur.max_degree() != target.jdd_d_max) throw InvalidInput("starting JDD degree bound differs from the target's");
    double want_avg = target.average_degree();
    std::size_t evals = 0, rejected = 0;
    auto evaluate = [&](const JointDegreeDistribution& j) -> std::optional<double> {
        ++evals;
        try {
            auto est = estimate_plength_from_jdd(j, target.n, target.k, opt.demand_pairs, opt.samples,
                                                 derive_seed(seed, evals), opt.threads);
            return distribution_distance_l2(est.dist, target_dist);
        } catch (const Error&) {
            ++rejected;
            return std::nullopt;
        }
    };
    auto first = evaluate(cur);
    if (!first) throw InvalidInput("starting joint degree distribution is not realizable");
    auto second = evaluate(cur);
    double cur_cost = second ? 0.5 * (*first + *second) : *first;
    JddFit fit{cur, cur_cost, SearchStatus::BudgetExhausted, 0, 0};
    double temp = opt.initial_temperature > 0 ? opt.initial_temperature : 0.05 * std::max(cur_cost, 1e-6);
    std::uniform_int_distribution<std::size_t> any_cell(0, cur.cell_count() - 1);
    std::uniform_real_distribution<double> unit(0, 1);
    for (std::size_t proposal = 1; evals < opt.evaluations; ++proposal) {
        if (opt.stop_distance > 0 && fit.distance <= opt.stop_distance) {
            fit.status = SearchStatus::Converged;
            break;
        }
        JointDegreeDistribution next = cur;
        bool ok = false;
        for (int tries = 0; tries < 200 && !ok; ++tries) {
            next = cur;
            std::size_t from = any_cell(rng), to = any_cell(rng);
            if (unit(rng) < opt.local_moves) {
                // nudge one end degree of the source cell by one
                auto [j, l] = cur.cell_degrees(from);
                auto& x = unit(rng) < 0.5 ? j : l;
                x = unit(rng) < 0.5 ? x - 1 : x + 1;
                if (j < 1 || l < 1 || j > cur.max_degree() || l > cur.max_degree()) continue;
                to = cur.cell_index(j, l);
            }
            if (from == to || cur.cell(from) <= 0) continue;
            double amount = std::min(opt.step, cur.cell(from));
            next.cell(from) -= amount;
            next.cell(to) += amount;
            ok = std::abs(next.average_degree() - want_avg) <= opt.average_degree_slack * want_avg &&
                 next.classes_connected();
        }
        if (!ok) continue;
        auto cost = evaluate(next);
        if (cost && (*cost <= cur_cost || unit(rng) < std::exp(-(*cost - cur_cost) / temp))) {
            cur = std::move(next);
            cur_cost = *cost;
            if (cur_cost < fit.distance && evals < opt.evaluations) {
                // a lucky draw should not become the answer: confirm with a second one
                auto again = evaluate(cur);
                double confirmed = again ? 0.5 * (cur_cost + *again) : cur_cost + 1;
                if (confirmed < fit.distance) {
                    fit.jdd = cur;
                    fit.distance = confirmed;
                }
            }
        }
        if (proposal % opt.cooling_every == 0) temp *= opt.cooling;
    }
    if (opt.stop_distance > 0 && fit.distance <= opt.stop_distance) fit.status = SearchStatus::Converged;
    fit.evaluations = evals;
    fit.rejected_unrealizable = rejected;
    return fit;
}

} // namespace creditnet

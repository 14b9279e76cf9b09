#pragma once

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

namespace creditnet::detail {

// Column-compressed LP in the form used by the revised simplex:
// maximize c.x  s.t.  rows 0..m_ub-1: a.x <= b,  rows m_ub..m-1: a.x = b,  x >= 0.
struct SparseLp {
    std::size_t rows = 0;
    std::size_t ub_rows = 0; // leading rows that are inequalities
    std::vector<double> objective;
    std::vector<double> rhs;
    // column j holds (row, value) pairs
    std::vector<std::vector<std::pair<std::size_t, double>>> columns;
};

enum class SparseOutcome { Optimal, Infeasible, Unbounded, IterationLimit, Singular };

struct SparseResult {
    SparseOutcome outcome = SparseOutcome::Singular;
    std::vector<double> x;
    double objective = 0;
    std::size_t iterations = 0;
};

// Bounded revised primal simplex. Every row gets a logical variable: free
// above 0 for inequalities, fixed at 0 for equalities. Nonbasic variables all
// sit at 0, so x_B = B^-1 b throughout. The basis is held as a sparse LU plus
// an eta file and refactored every few dozen pivots.
class RevisedSimplex {
public:
    RevisedSimplex(const SparseLp& lp, std::size_t max_iter, std::size_t bland_after)
        : lp_(lp), m_(lp.rows), n_(lp.objective.size()), max_iter_(max_iter), bland_after_(bland_after)
    {
        double scale = 1;
        for (double v : lp.rhs) scale = std::max(scale, std::abs(v));
        ptol_ = 1e-11 * scale;
        head_.resize(m_);
        where_.assign(n_ + m_, -1);
        weight_.assign(n_ + m_, 1.0);
        for (std::size_t i = 0; i < m_; ++i) {
            head_[i] = n_ + i;
            where_[n_ + i] = static_cast<long>(i);
        }
    }

    SparseResult solve()
    {
        SparseResult out;
        if (!refactor()) return out;
        bool fresh = true;
        for (;;) {
            bool phase1 = infeasible();
            if (phase1 || !d_valid_) {
                cost_.assign(m_, 0.0);
                for (std::size_t i = 0; i < m_; ++i) cost_[i] = phase1 ? phase1_cost(i) : phase2_cost(head_[i]);
                reduced_costs(btran(cost_), phase1);
                d_valid_ = !phase1;
            }
            long q = price();
            if (q < 0) {
                // confirm with a clean factorization before stopping
                if (!fresh) {
                    if (!refactor()) return out;
                    fresh = true;
                    continue;
                }
                if (phase1) {
                    out.outcome = SparseOutcome::Infeasible;
                    out.iterations = iter_;
                    return out;
                }
                break;
            }
            if (iter_ >= max_iter_) {
                out.outcome = SparseOutcome::IterationLimit;
                out.iterations = iter_;
                return out;
            }
            std::vector<double> alpha = ftran_column(static_cast<std::size_t>(q));
            long r = ratio(alpha, phase1);
            if (r < 0) {
                if (phase1) return out; // cannot happen with exact arithmetic
                out.outcome = SparseOutcome::Unbounded;
                out.iterations = iter_;
                return out;
            }
            pivot_row_update(static_cast<std::size_t>(q), static_cast<std::size_t>(r), alpha);
            step(static_cast<std::size_t>(q), static_cast<std::size_t>(r), alpha);
            ++iter_;
            fresh = false;
            if (etas_.size() >= refactor_every && !refactor()) return out;
        }
        out.outcome = SparseOutcome::Optimal;
        out.iterations = iter_;
        out.x.assign(n_, 0.0);
        for (std::size_t i = 0; i < m_; ++i)
            if (head_[i] < n_) out.x[head_[i]] = std::max(0.0, xb_[i]);
        for (std::size_t j = 0; j < n_; ++j) out.objective += lp_.objective[j] * out.x[j];
        return out;
    }

private:
    static constexpr std::size_t refactor_every = 48;
    static constexpr double dtol = 1e-9;
    static constexpr double pivot_tol = 1e-7;

    struct Eta {
        std::size_t row;
        std::vector<std::pair<std::size_t, double>> alpha; // nonzeros of the entering column
        double pivot;
    };

    bool fixed(std::size_t j) const { return j >= n_ && j - n_ >= lp_.ub_rows; }
    double upper(std::size_t j) const { return fixed(j) ? 0.0 : std::numeric_limits<double>::infinity(); }

    bool infeasible() const
    {
        for (std::size_t i = 0; i < m_; ++i)
            if (xb_[i] < -ptol_ || xb_[i] > upper(head_[i]) + ptol_) return true;
        return false;
    }

    // minimisation costs
    double phase1_cost(std::size_t i) const
    {
        if (xb_[i] < -ptol_) return -1.0;
        if (xb_[i] > upper(head_[i]) + ptol_) return 1.0;
        return 0.0;
    }
    double phase2_cost(std::size_t j) const { return j < n_ ? -lp_.objective[j] : 0.0; }

    double dot_column(const std::vector<double>& y, std::size_t j) const
    {
        if (j >= n_) return y[j - n_];
        double s = 0;
        for (const auto& [i, v] : lp_.columns[j]) s += y[i] * v;
        return s;
    }

    void reduced_costs(const std::vector<double>& y, bool phase1)
    {
        d_.assign(n_ + m_, 0.0);
        for (std::size_t j = 0; j < n_ + m_; ++j) {
            if (where_[j] >= 0 || fixed(j)) continue;
            d_[j] = (phase1 ? 0.0 : phase2_cost(j)) - dot_column(y, j);
        }
    }

    long price() const
    {
        bool bland = iter_ >= bland_after_;
        long best = -1;
        double best_score = 0;
        for (std::size_t j = 0; j < n_ + m_; ++j) {
            if (where_[j] >= 0 || fixed(j)) continue;
            double d = d_[j];
            if (d < -dtol) {
                if (bland) return static_cast<long>(j);
                double score = d * d / weight_[j];
                if (score > best_score) {
                    best_score = score;
                    best = static_cast<long>(j);
                }
            }
        }
        return best;
    }

    // Computes row r of B^-1 A once and uses it for the reduced-cost update
    // and the Devex reference weights.
    void pivot_row_update(std::size_t q, std::size_t r, const std::vector<double>& alpha)
    {
        std::vector<double> e(m_, 0.0);
        e[r] = 1.0;
        std::vector<double> rho = btran(e);
        double arq = alpha[r];
        double wq = weight_[q];
        double step_d = d_[q] / arq;
        bool reset = false;
        for (std::size_t j = 0; j < n_ + m_; ++j) {
            if (where_[j] >= 0 || j == q || fixed(j)) continue;
            double arj = dot_column(rho, j);
            if (arj == 0.0) continue;
            d_[j] -= step_d * arj;
            double ratio = arj / arq;
            weight_[j] = std::max(weight_[j], ratio * ratio * wq);
            if (weight_[j] > 1e8) reset = true;
        }
        std::size_t leaving = head_[r];
        d_[leaving] = -step_d;
        d_[q] = 0.0;
        weight_[leaving] = std::max(wq / (arq * arq), 1.0);
        if (reset) weight_.assign(n_ + m_, 1.0);
    }

    // Harris two-pass ratio test on x_B(t) = x_B - t * alpha.
    long ratio(const std::vector<double>& alpha, bool phase1) const
    {
        const double inf = std::numeric_limits<double>::infinity();
        auto bound_for = [&](std::size_t i, double a, double& bound) {
            double x = xb_[i], ub = upper(head_[i]);
            if (a > 0) {
                // decreasing
                if (phase1 && x > ub + ptol_) {
                    bound = ub;
                    return true;
                }
                if (phase1 && x < -ptol_) return false;
                bound = 0.0;
                return true;
            }
            // increasing
            if (phase1 && x < -ptol_) {
                bound = 0.0;
                return true;
            }
            if (ub == inf) return false;
            if (phase1 && x > ub + ptol_) return false;
            bound = ub;
            return true;
        };
        double theta = inf;
        for (std::size_t i = 0; i < m_; ++i) {
            double a = alpha[i];
            if (std::abs(a) < pivot_tol) continue;
            double bound;
            if (!bound_for(i, a, bound)) continue;
            double room = a > 0 ? xb_[i] - bound : bound - xb_[i];
            theta = std::min(theta, (std::max(room, 0.0) + ptol_) / std::abs(a));
        }
        if (theta == inf) return -1;
        bool bland = iter_ >= bland_after_;
        long r = -1;
        double best = 0, best_ratio = inf;
        for (std::size_t i = 0; i < m_; ++i) {
            double a = alpha[i];
            if (std::abs(a) < pivot_tol) continue;
            double bound;
            if (!bound_for(i, a, bound)) continue;
            double room = a > 0 ? xb_[i] - bound : bound - xb_[i];
            double t = std::max(room, 0.0) / std::abs(a);
            if (t > theta) continue;
            if (bland) {
                if (r < 0 || t < best_ratio - 1e-12 || (t <= best_ratio + 1e-12 && head_[i] < head_[static_cast<std::size_t>(r)])) {
                    r = static_cast<long>(i);
                    best_ratio = t;
                }
            } else if (std::abs(a) > best) {
                best = std::abs(a);
                r = static_cast<long>(i);
            }
        }
        return r;
    }

    void step(std::size_t q, std::size_t r, const std::vector<double>& alpha)
    {
        double a = alpha[r];
        double bound = 0.0; // every bound a leaving variable can hit is 0
        double t = std::max(0.0, (xb_[r] - bound) / a);
        for (std::size_t i = 0; i < m_; ++i)
            if (alpha[i] != 0.0) xb_[i] -= t * alpha[i];
        xb_[r] = t;
        where_[head_[r]] = -1;
        head_[r] = q;
        where_[q] = static_cast<long>(r);
        Eta e{r, {}, a};
        for (std::size_t i = 0; i < m_; ++i)
            if (i != r && std::abs(alpha[i]) > 1e-14) e.alpha.emplace_back(i, alpha[i]);
        etas_.push_back(std::move(e));
    }

    bool refactor()
    {
        std::vector<Eigen::Triplet<double>> trip;
        for (std::size_t i = 0; i < m_; ++i) {
            std::size_t j = head_[i];
            if (j >= n_) {
                trip.emplace_back(static_cast<int>(j - n_), static_cast<int>(i), 1.0);
            } else {
                for (const auto& [row, v] : lp_.columns[j]) trip.emplace_back(static_cast<int>(row), static_cast<int>(i), v);
            }
        }
        Eigen::SparseMatrix<double> B(static_cast<int>(m_), static_cast<int>(m_));
        B.setFromTriplets(trip.begin(), trip.end());
        B.makeCompressed();
        lu_.analyzePattern(B);
        lu_.factorize(B);
        if (lu_.info() != Eigen::Success) return false;
        etas_.clear();
        d_valid_ = false;
        Eigen::VectorXd b(static_cast<int>(m_));
        for (std::size_t i = 0; i < m_; ++i) b[static_cast<int>(i)] = lp_.rhs[i];
        Eigen::VectorXd x = lu_.solve(b);
        xb_.assign(x.data(), x.data() + m_);
        for (double v : xb_)
            if (!std::isfinite(v)) return false;
        return true;
    }

    std::vector<double> ftran_column(std::size_t j) const
    {
        Eigen::VectorXd a = Eigen::VectorXd::Zero(static_cast<int>(m_));
        if (j >= n_)
            a[static_cast<int>(j - n_)] = 1.0;
        else
            for (const auto& [i, v] : lp_.columns[j]) a[static_cast<int>(i)] = v;
        Eigen::VectorXd x = lu_.solve(a);
        std::vector<double> y(x.data(), x.data() + m_);
        for (const auto& e : etas_) {
            double yr = y[e.row] / e.pivot;
            if (yr != 0.0)
                for (const auto& [i, v] : e.alpha) y[i] -= v * yr;
            y[e.row] = yr;
        }
        return y;
    }

    std::vector<double> btran(const std::vector<double>& c) const
    {
        std::vector<double> v = c;
        for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
            double s = v[it->row];
            for (const auto& [i, a] : it->alpha) s -= a * v[i];
            v[it->row] = s / it->pivot;
        }
        Eigen::VectorXd rhs(static_cast<int>(m_));
        for (std::size_t i = 0; i < m_; ++i) rhs[static_cast<int>(i)] = v[i];
        Eigen::VectorXd y = lu_.transpose().solve(rhs);
        return std::vector<double>(y.data(), y.data() + m_);
    }

    const SparseLp& lp_;
    std::size_t m_, n_;
    std::size_t max_iter_, bland_after_;
    std::size_t iter_ = 0;
    double ptol_ = 1e-11;
    std::vector<std::size_t> head_;
    std::vector<long> where_;
    std::vector<double> xb_, cost_, weight_, d_;
    bool d_valid_ = false;
    std::vector<Eta> etas_;
    mutable Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu_;
};

} // namespace creditnet::detail

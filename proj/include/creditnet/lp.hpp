#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "creditnet/error.hpp"
#include "creditnet/sparse_simplex.hpp"
#include "creditnet/tokens.hpp"

namespace creditnet {

template <class T>
struct LpTraits {
    static T eps() { return T(1e-9); }
    static T abs(const T& x) { return x < 0 ? T(-x) : x; }
};

template <>
struct LpTraits<Tokens> {
    static Tokens eps() { return Tokens(0); }
    static Tokens abs(const Tokens& x) { return x < 0 ? Tokens(-x) : x; }
};

// maximize c.x  s.t.  A x <= b,  E x = d,  x >= 0
template <class T>
struct BasicLpProblem {
    std::vector<T> objective;
    std::vector<std::vector<T>> ub_rows;
    std::vector<T> ub_rhs;
    std::vector<std::vector<T>> eq_rows;
    std::vector<T> eq_rhs;
    std::vector<std::string> names; // optional variable names for export

    std::size_t variable_count() const { return objective.size(); }

    void validate() const
    {
        if (ub_rows.size() != ub_rhs.size() || eq_rows.size() != eq_rhs.size())
            throw InvalidInput("LP: row and bound counts differ");
        for (const auto& r : ub_rows)
            if (r.size() != objective.size()) throw InvalidInput("LP: inequality row has wrong width");
        for (const auto& r : eq_rows)
            if (r.size() != objective.size()) throw InvalidInput("LP: equality row has wrong width");
        if (!names.empty() && names.size() != objective.size()) throw InvalidInput("LP: name count differs");
    }
};

using LpProblem = BasicLpProblem<double>;

enum class LpStatus { Optimal, Infeasible, Unbounded, NumericalFailure };

inline const char* lp_status_name(LpStatus s)
{
    switch (s) {
    case LpStatus::Optimal: return "Optimal";
    case LpStatus::Infeasible: return "Infeasible";
    case LpStatus::Unbounded: return "Unbounded";
    default: return "NumericalFailure";
    }
}

template <class T>
struct BasicLpSolution {
    LpStatus status = LpStatus::NumericalFailure;
    T objective = T(0);
    std::vector<T> x;
    std::size_t iterations = 0;
};

using LpSolution = BasicLpSolution<double>;

struct SimplexOptions {
    // 0 = automatic: 50 * (rows + cols) + 1000
    std::size_t max_iterations = 0;
    // Dantzig pricing switches to Bland's rule after this many pivots;
    // 0 = automatic: 5 * (rows + cols)
    std::size_t bland_after = 0;
};

namespace detail {

// Tableau simplex in the style of the classic competitive-programming solver,
// with a Harris ratio test for numerical stability on degenerate problems.
template <class T>
class Tableau {
public:
    Tableau(const BasicLpProblem<T>& p, const SimplexOptions& opt)
        : m_(p.ub_rows.size()), n_(p.variable_count()), w_(n_ + 2), D_((m_ + 2) * w_, T(0)), B_(m_), N_(n_ + 1)
    {
        for (std::size_t i = 0; i < m_; ++i) {
            for (std::size_t j = 0; j < n_; ++j) at(i, j) = p.ub_rows[i][j];
            at(i, n_) = T(-1);
            at(i, n_ + 1) = p.ub_rhs[i];
            B_[i] = static_cast<long>(n_ + i);
        }
        for (std::size_t j = 0; j < n_; ++j) {
            N_[j] = static_cast<long>(j);
            at(m_, j) = T(-p.objective[j]);
        }
        N_[n_] = -1;
        at(m_ + 1, n_) = T(1);
        std::size_t scale = m_ + n_;
        max_iter_ = opt.max_iterations ? opt.max_iterations : 50 * scale + 1000;
        bland_after_ = opt.bland_after ? opt.bland_after : 5 * scale;
    }

    BasicLpSolution<T> solve()
    {
        BasicLpSolution<T> out;
        std::size_t r = 0;
        for (std::size_t i = 1; i < m_; ++i)
            if (at(i, n_ + 1) < at(r, n_ + 1)) r = i;
        if (m_ > 0 && at(r, n_ + 1) < -eps()) {
            pivot(r, n_);
            Outcome o = run(2);
            if (o == Outcome::Stalled) return fail(out);
            if (o != Outcome::Optimal || at(m_ + 1, n_ + 1) < -eps()) {
                out.status = LpStatus::Infeasible;
                out.iterations = iter_;
                return out;
            }
            for (std::size_t i = 0; i < m_; ++i)
                if (B_[i] == -1) {
                    std::size_t s = 0;
                    for (std::size_t j = 1; j <= n_; ++j)
                        if (absv(at(i, j)) > absv(at(i, s))) s = j;
                    if (absv(at(i, s)) > eps()) pivot(i, s);
                }
        }
        Outcome o = run(1);
        out.iterations = iter_;
        if (o == Outcome::Stalled) return fail(out);
        if (o == Outcome::Unbounded) {
            out.status = LpStatus::Unbounded;
            return out;
        }
        out.status = LpStatus::Optimal;
        out.x.assign(n_, T(0));
        for (std::size_t i = 0; i < m_; ++i)
            if (B_[i] >= 0 && static_cast<std::size_t>(B_[i]) < n_) out.x[static_cast<std::size_t>(B_[i])] = at(i, n_ + 1);
        out.objective = at(m_, n_ + 1);
        return out;
    }

private:
    enum class Outcome { Optimal, Unbounded, Stalled };

    static T eps() { return LpTraits<T>::eps(); }
    static T absv(const T& x) { return LpTraits<T>::abs(x); }
    static bool less(const T& a, long ia, const T& b, long ib) { return a < b || (a == b && ia < ib); }

    T& at(std::size_t i, std::size_t j) { return D_[i * w_ + j]; }
    const T& at(std::size_t i, std::size_t j) const { return D_[i * w_ + j]; }

    void pivot(std::size_t r, std::size_t s)
    {
        T* a = &D_[r * w_];
        T inv = T(1) / a[s];
        nz_.clear();
        for (std::size_t j = 0; j < w_; ++j)
            if (j != s && a[j] != T(0)) nz_.push_back(j);
        for (std::size_t i = 0; i < m_ + 2; ++i) {
            if (i == r) continue;
            T* b = &D_[i * w_];
            if (absv(b[s]) > eps()) {
                T f = b[s] * inv;
                for (std::size_t j : nz_) b[j] -= a[j] * f;
                b[s] = -f;
            } else {
                b[s] *= -inv;
            }
        }
        for (std::size_t j : nz_) a[j] *= inv;
        a[s] = inv;
        std::swap(B_[r], N_[s]);
    }

    // Two-pass Harris ratio test: find the loosest step that keeps every basic
    // variable above -tol, then take the largest pivot among rows blocking
    // within that step.
    long harris_row(std::size_t s) const
    {
        const T piv = pivot_tol();
        bool have = false;
        T theta = T(0);
        for (std::size_t i = 0; i < m_; ++i) {
            const T& a = at(i, s);
            if (!(a > piv)) continue;
            T rhs = at(i, n_ + 1);
            if (rhs < T(0)) rhs = T(0);
            T t = (rhs + eps()) / a;
            if (!have || t < theta) {
                theta = t;
                have = true;
            }
        }
        if (!have) return -1;
        long r = -1;
        for (std::size_t i = 0; i < m_; ++i) {
            const T& a = at(i, s);
            if (!(a > piv)) continue;
            T rhs = at(i, n_ + 1);
            if (rhs < T(0)) rhs = T(0);
            if (rhs / a > theta) continue;
            if (r < 0 || a > at(static_cast<std::size_t>(r), s) ||
                (a == at(static_cast<std::size_t>(r), s) && B_[i] < B_[static_cast<std::size_t>(r)]))
                r = static_cast<long>(i);
        }
        return r;
    }

    // Minimum ratio, ties to the smallest basic index (Bland).
    long bland_row(std::size_t s) const
    {
        const T piv = pivot_tol();
        long r = -1;
        T best = T(0);
        for (std::size_t i = 0; i < m_; ++i) {
            const T& a = at(i, s);
            if (!(a > piv)) continue;
            T rhs = at(i, n_ + 1);
            if (rhs < T(0)) rhs = T(0);
            T t = rhs / a;
            if (r < 0 || t < best - eps() ||
                (t <= best + eps() && B_[i] < B_[static_cast<std::size_t>(r)])) {
                r = static_cast<long>(i);
                best = t;
            }
        }
        return r;
    }

    static T pivot_tol()
    {
        if constexpr (std::is_same_v<T, Tokens>)
            return T(0);
        else
            return T(1e-7);
    }

    Outcome run(int phase)
    {
        std::size_t x = m_ + static_cast<std::size_t>(phase) - 1;
        for (;;) {
            if (iter_ >= max_iter_) return Outcome::Stalled;
            bool bland = iter_ >= bland_after_;
            long s = -1;
            for (std::size_t j = 0; j <= n_; ++j) {
                if (N_[j] == -phase) continue;
                const T& c = at(x, j);
                if (bland) {
                    if (c < -eps() && (s < 0 || N_[j] < N_[static_cast<std::size_t>(s)])) s = static_cast<long>(j);
                } else if (s < 0 || less(c, N_[j], at(x, static_cast<std::size_t>(s)), N_[static_cast<std::size_t>(s)])) {
                    s = static_cast<long>(j);
                }
            }
            if (s < 0 || at(x, static_cast<std::size_t>(s)) >= -eps()) return Outcome::Optimal;
            std::size_t sc = static_cast<std::size_t>(s);
            long r = bland ? bland_row(sc) : harris_row(sc);
            if (r < 0) return Outcome::Unbounded;
            pivot(static_cast<std::size_t>(r), sc);
            ++iter_;
        }
    }

    BasicLpSolution<T> fail(BasicLpSolution<T>& out)
    {
        out.status = LpStatus::NumericalFailure;
        out.iterations = iter_;
        return out;
    }

    std::size_t m_, n_, w_;
    std::vector<T> D_;
    std::vector<long> B_, N_;
    std::vector<std::size_t> nz_;
    std::size_t iter_ = 0, max_iter_ = 0, bland_after_ = 0;
};

} // namespace detail

namespace detail {

// Dense tableau; every equality becomes a pair of inequalities.
template <class T>
BasicLpSolution<T> solve_dense(const BasicLpProblem<T>& problem, const SimplexOptions& opt)
{
    BasicLpProblem<T> p;
    p.objective = problem.objective;
    p.ub_rows = problem.ub_rows;
    p.ub_rhs = problem.ub_rhs;
    for (std::size_t i = 0; i < problem.eq_rows.size(); ++i) {
        p.ub_rows.push_back(problem.eq_rows[i]);
        p.ub_rhs.push_back(problem.eq_rhs[i]);
        std::vector<T> neg(problem.eq_rows[i].size());
        for (std::size_t j = 0; j < neg.size(); ++j) neg[j] = -problem.eq_rows[i][j];
        p.ub_rows.push_back(std::move(neg));
        p.ub_rhs.push_back(-problem.eq_rhs[i]);
    }
    Tableau<T> tab(p, opt);
    auto sol = tab.solve();
    if constexpr (!std::is_same_v<T, Tokens>) {
        for (auto& v : sol.x)
            if (v < 0 && v > -1e-9) v = 0;
    }
    return sol;
}

inline SparseLp to_sparse(const LpProblem& p)
{
    SparseLp s;
    s.ub_rows = p.ub_rows.size();
    s.rows = p.ub_rows.size() + p.eq_rows.size();
    s.objective = p.objective;
    s.rhs = p.ub_rhs;
    s.rhs.insert(s.rhs.end(), p.eq_rhs.begin(), p.eq_rhs.end());
    s.columns.resize(p.variable_count());
    for (std::size_t i = 0; i < s.rows; ++i) {
        const auto& row = i < s.ub_rows ? p.ub_rows[i] : p.eq_rows[i - s.ub_rows];
        for (std::size_t j = 0; j < row.size(); ++j)
            if (row[j] != 0.0) s.columns[j].emplace_back(i, row[j]);
    }
    return s;
}

inline LpSolution solve_sparse(const SparseLp& lp, const SimplexOptions& opt)
{
    if (lp.rows == 0) {
        LpSolution out;
        bool up = std::any_of(lp.objective.begin(), lp.objective.end(), [](double c) { return c > 0; });
        out.status = up ? LpStatus::Unbounded : LpStatus::Optimal;
        if (!up) out.x.assign(lp.objective.size(), 0.0);
        return out;
    }
    std::size_t scale = lp.rows + lp.objective.size();
    std::size_t max_iter = opt.max_iterations ? opt.max_iterations : 50 * scale + 1000;
    std::size_t bland_after = opt.bland_after ? opt.bland_after : 5 * scale;
    RevisedSimplex rs(lp, max_iter, bland_after);
    SparseResult r = rs.solve();
    LpSolution out;
    out.iterations = r.iterations;
    switch (r.outcome) {
    case SparseOutcome::Optimal:
        out.status = LpStatus::Optimal;
        out.x = std::move(r.x);
        out.objective = r.objective;
        return out;
    case SparseOutcome::Infeasible: out.status = LpStatus::Infeasible; return out;
    case SparseOutcome::Unbounded: out.status = LpStatus::Unbounded; return out;
    case SparseOutcome::IterationLimit: out.status = LpStatus::NumericalFailure; return out;
    case SparseOutcome::Singular: break;
    }
    // basis went singular: fall back to the dense tableau
    LpProblem dense;
    dense.objective = lp.objective;
    std::vector<std::vector<double>> rows(lp.rows, std::vector<double>(lp.objective.size(), 0.0));
    for (std::size_t j = 0; j < lp.columns.size(); ++j)
        for (const auto& [i, v] : lp.columns[j]) rows[i][j] = v;
    for (std::size_t i = 0; i < lp.rows; ++i) {
        if (i < lp.ub_rows) {
            dense.ub_rows.push_back(std::move(rows[i]));
            dense.ub_rhs.push_back(lp.rhs[i]);
        } else {
            dense.eq_rows.push_back(std::move(rows[i]));
            dense.eq_rhs.push_back(lp.rhs[i]);
        }
    }
    return solve_dense(dense, opt);
}

} // namespace detail

// Exact rationals use the dense tableau; doubles use the sparse revised simplex.
template <class T>
BasicLpSolution<T> solve_lp(const BasicLpProblem<T>& problem, const SimplexOptions& opt = {})
{
    problem.validate();
    if constexpr (std::is_same_v<T, double>)
        return detail::solve_sparse(detail::to_sparse(problem), opt);
    else
        return detail::solve_dense(problem, opt);
}

namespace detail {

template <class T>
std::string lp_number(const T& v)
{
    if constexpr (std::is_same_v<T, Tokens>) {
        return format_tokens(v);
    } else {
        std::ostringstream s;
        s.precision(17);
        s << v;
        return s.str();
    }
}

template <class T>
void write_lp_expr(std::ostream& out, const std::vector<T>& row, const std::vector<std::string>& names)
{
    bool first = true;
    for (std::size_t j = 0; j < row.size(); ++j) {
        if (row[j] == T(0)) continue;
        T c = row[j];
        bool neg = c < 0;
        if (neg) c = -c;
        if (first)
            out << (neg ? "- " : "");
        else
            out << (neg ? " - " : " + ");
        if (c != T(1)) out << lp_number(c) << ' ';
        out << names[j];
        first = false;
    }
    if (first) out << "0 " << names.at(0);
}

} // namespace detail

// CPLEX LP text of a BasicLpProblem (continuous variables, x >= 0).
template <class T>
void write_cplex_lp(std::ostream& out, const BasicLpProblem<T>& p)
{
    p.validate();
    std::vector<std::string> names = p.names;
    if (names.empty())
        for (std::size_t j = 0; j < p.variable_count(); ++j) names.push_back("x" + std::to_string(j));
    out << "\\ generated by creditnet\nMaximize\n obj: ";
    detail::write_lp_expr(out, p.objective, names);
    out << "\nSubject To\n";
    for (std::size_t i = 0; i < p.ub_rows.size(); ++i) {
        out << " c" << i << ": ";
        detail::write_lp_expr(out, p.ub_rows[i], names);
        out << " <= " << detail::lp_number(p.ub_rhs[i]) << '\n';
    }
    for (std::size_t i = 0; i < p.eq_rows.size(); ++i) {
        out << " e" << i << ": ";
        detail::write_lp_expr(out, p.eq_rows[i], names);
        out << " = " << detail::lp_number(p.eq_rhs[i]) << '\n';
    }
    out << "Bounds\n";
    for (const auto& n : names) out << " " << n << " >= 0\n";
    out << "End\n";
}

} // namespace creditnet

#include "fairmdp/lp.hpp"

#include <cmath>
#include <limits>

namespace fairmdp {

void LinearProgram::validate() const {
    const int n = n_vars();
    const int m = n_constraints();
    if (equality.rows() != m || equality.cols() != n)
        throw ValidationError("lp: A shape inconsistent with c/b");
    if (int(signs.size()) != n) throw ValidationError("lp: signs length mismatch");
    if (!objective.allFinite() || !equality.allFinite() || !rhs.allFinite())
        throw ValidationError("lp: non-finite coefficient");
}

namespace {

// Dense tableau simplex working entirely in the split nonnegative space.
class Tableau {
public:
    Tableau(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, int n_structural)
        : m_(int(b.size())), n_(n_structural), t_(m_, n_structural + m_), xb_(b),
          basis_(std::size_t(m_)) {
        t_.leftCols(n_) = a;
        t_.rightCols(m_) = Eigen::MatrixXd::Identity(m_, m_);
        // Normalize rhs >= 0 so the artificial identity basis is feasible.
        for (int i = 0; i < m_; ++i) {
            if (xb_(i) < 0.0) {
                t_.row(i) = -t_.row(i);
                xb_(i) = -xb_(i);
            }
            basis_[std::size_t(i)] = n_ + i; // artificial
        }
    }

    int structural_count() const { return n_; }
    int artificial_of_row(int i) const { return n_ + i; }
    bool is_artificial(int j) const { return j >= n_; }
    int basis(int i) const { return basis_[std::size_t(i)]; }
    double basic_value(int i) const { return xb_(i); }

    // Runs the simplex with the given cost vector over all columns (length
    // n_ + m_), maximization. allow_artificial re-entry is disabled in
    // phase 2. Returns false when unbounded.
    bool optimize(const Eigen::VectorXd& cost, bool allow_artificial) {
        bool bland = false;
        double last_objective = objective(cost);
        const int cap = 10000 + 200 * (m_ + n_);
        for (int iter = 0; iter < cap; ++iter) {
            // Reduced costs d_j = c_j - c_B . T_j; improving when d_j > 0.
            Eigen::VectorXd cb(m_);
            for (int i = 0; i < m_; ++i) cb(i) = cost(basis_[std::size_t(i)]);

            int entering = -1;
            double best = lptol::reduced_cost_zero;
            bool breakdown_candidate = false;
            for (int j = 0; j < n_ + m_; ++j) {
                if (!allow_artificial && is_artificial(j)) continue;
                if (in_basis(j)) continue;
                const double d = cost(j) - cb.dot(t_.col(j));
                if (d <= lptol::reduced_cost_zero) continue;
                if (bland) {
                    // Smallest improving index, but only if it admits a pivot.
                    if (pivot_row(j) >= 0) {
                        entering = j;
                        break;
                    }
                    if (has_tiny_pivot_only(j)) breakdown_candidate = true;
                    continue;
                }
                if (d > best) {
                    best = d;
                    entering = j;
                }
            }
            if (!bland && entering >= 0 && pivot_row(entering) < 0) {
                // Dantzig's pick is unusable; scan the alternatives.
                if (has_tiny_pivot_only(entering)) breakdown_candidate = true;
                const int blocked = entering;
                entering = -1;
                for (int j = 0; j < n_ + m_; ++j) {
                    if (j == blocked || (!allow_artificial && is_artificial(j))) continue;
                    if (in_basis(j)) continue;
                    const double d = cost(j) - cb.dot(t_.col(j));
                    if (d <= lptol::reduced_cost_zero) continue;
                    if (pivot_row(j) >= 0) {
                        entering = j;
                        break;
                    }
                    if (has_tiny_pivot_only(j)) breakdown_candidate = true;
                    if (all_nonpositive(j)) return false; // unbounded ray
                }
                if (entering < 0) {
                    if (all_nonpositive(blocked)) return false;
                    if (breakdown_candidate)
                        throw NumericalError("simplex: pivot below 1e-11 with no alternative");
                    return true; // only sub-threshold improvements remain
                }
            }
            if (entering < 0) {
                if (breakdown_candidate)
                    throw NumericalError("simplex: pivot below 1e-11 with no alternative");
                return true; // optimal
            }

            const int leaving = pivot_row(entering);
            if (leaving < 0) {
                if (all_nonpositive(entering)) return false;
                throw NumericalError("simplex: pivot below 1e-11 with no alternative");
            }
            const bool degenerate = xb_(leaving) <= lptol::feasibility;
            pivot(leaving, entering);

            const double obj = objective(cost);
            if (degenerate) {
                bland = true;
            } else if (obj > last_objective + 1e-13) {
                bland = false;
            }
            last_objective = obj;
        }
        throw NumericalError("simplex: iteration cap exceeded");
    }

    double objective(const Eigen::VectorXd& cost) const {
        double v = 0.0;
        for (int i = 0; i < m_; ++i) v += cost(basis_[std::size_t(i)]) * xb_(i);
        return v;
    }

    // After phase 1: pivot surviving artificials out on any usable structural
    // column; fully zero rows are redundant constraints and may keep their
    // artificial basic at value 0.
    void drive_out_artificials() {
        for (int i = 0; i < m_; ++i) {
            if (!is_artificial(basis_[std::size_t(i)])) continue;
            for (int j = 0; j < n_; ++j) {
                if (in_basis(j)) continue;
                if (std::abs(t_(i, j)) > lptol::pivot_floor) {
                    pivot(i, j);
                    break;
                }
            }
        }
    }

    Eigen::VectorXd extract(int n) const {
        Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
        for (int i = 0; i < m_; ++i)
            if (basis_[std::size_t(i)] < n) x(basis_[std::size_t(i)]) = xb_(i);
        return x;
    }

private:
    bool in_basis(int j) const {
        for (int i = 0; i < m_; ++i)
            if (basis_[std::size_t(i)] == j) return true;
        return false;
    }

    // Min-ratio row for column j, or -1 when no entry exceeds the pivot
    // floor. Ties break toward the smallest basis index (Bland-compatible).
    int pivot_row(int j) const {
        int row = -1;
        double best = std::numeric_limits<double>::infinity();
        for (int i = 0; i < m_; ++i) {
            const double a = t_(i, j);
            if (a <= lptol::pivot_floor) continue;
            const double ratio = xb_(i) / a;
            if (ratio < best - 1e-12 ||
                (ratio < best + 1e-12 && row >= 0 &&
                 basis_[std::size_t(i)] < basis_[std::size_t(row)])) {
                best = ratio;
                row = i;
            }
        }
        return row;
    }

    bool has_tiny_pivot_only(int j) const {
        bool any_positive = false;
        for (int i = 0; i < m_; ++i) {
            if (t_(i, j) > lptol::pivot_floor) return false;
            if (t_(i, j) > 0.0) any_positive = true;
        }
        return any_positive;
    }

    bool all_nonpositive(int j) const {
        for (int i = 0; i < m_; ++i)
            if (t_(i, j) > lptol::pivot_floor) return false;
        return true;
    }

    void pivot(int row, int col) {
        const double p = t_(row, col);
        t_.row(row) /= p;
        xb_(row) /= p;
        for (int i = 0; i < m_; ++i) {
            if (i == row) continue;
            const double f = t_(i, col);
            if (f == 0.0) continue;
            t_.row(i) -= f * t_.row(row);
            xb_(i) -= f * xb_(row);
        }
        // Clamp tiny negative drift on basic values.
        for (int i = 0; i < m_; ++i)
            if (xb_(i) < 0.0 && xb_(i) > -lptol::feasibility) xb_(i) = 0.0;
        basis_[std::size_t(row)] = col;
    }

    int m_, n_;
    Eigen::MatrixXd t_;
    Eigen::VectorXd xb_;
    std::vector<int> basis_;
};

} // namespace

LpSolution solve(const LinearProgram& lp) {
    lp.validate();
    const int n = lp.n_vars();
    const int m = lp.n_constraints();

    // Split free variables into nonnegative pairs.
    std::vector<int> split_of(std::size_t(n), -1);
    int n_split = n;
    for (int j = 0; j < n; ++j)
        if (lp.signs[std::size_t(j)] == VarSign::Free) split_of[std::size_t(j)] = n_split++;

    Eigen::MatrixXd a(m, n_split);
    a.leftCols(n) = lp.equality;
    Eigen::VectorXd c = Eigen::VectorXd::Zero(n_split);
    c.head(n) = lp.objective;
    for (int j = 0; j < n; ++j) {
        if (split_of[std::size_t(j)] >= 0) {
            a.col(split_of[std::size_t(j)]) = -lp.equality.col(j);
            c(split_of[std::size_t(j)]) = -lp.objective(j);
        }
    }

    Tableau tableau(a, lp.rhs, n_split);

    // Phase 1: maximize -(sum of artificials).
    Eigen::VectorXd phase1 = Eigen::VectorXd::Zero(n_split + m);
    phase1.tail(m).setConstant(-1.0);
    if (!tableau.optimize(phase1, /*allow_artificial=*/true))
        throw NumericalError("simplex: phase 1 reported unbounded");
    if (-tableau.objective(phase1) > lptol::phase1_feasible) {
        LpSolution sol;
        sol.status = LpStatus::Infeasible;
        return sol;
    }
    tableau.drive_out_artificials();

    // Phase 2: the real objective, artificials banned.
    Eigen::VectorXd phase2 = Eigen::VectorXd::Zero(n_split + m);
    phase2.head(n_split) = c;
    if (!tableau.optimize(phase2, /*allow_artificial=*/false)) {
        LpSolution sol;
        sol.status = LpStatus::Unbounded;
        return sol;
    }

    const Eigen::VectorXd xs = tableau.extract(n_split);
    LpSolution sol;
    sol.status = LpStatus::Optimal;
    sol.x = xs.head(n);
    for (int j = 0; j < n; ++j)
        if (split_of[std::size_t(j)] >= 0) sol.x(j) -= xs(split_of[std::size_t(j)]);
    sol.objective = lp.objective.dot(sol.x);

    const double residual = (lp.equality * sol.x - lp.rhs).cwiseAbs().maxCoeff();
    if (residual > lptol::feasibility)
        throw NumericalError("simplex: optimal point violates A x = b beyond 1e-7");
    return sol;
}

} // namespace fairmdp

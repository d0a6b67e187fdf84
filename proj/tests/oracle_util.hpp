// Test-only oracles, independent of the implementation paths they check:
// value iteration, truncated power series, basic-solution enumeration for
// small LPs, a dense grid-search fair-policy oracle, and a regularized
// incomplete beta function. Shared by the unit suites and the acceptance
// runner.
#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "fairmdp/fair_lp.hpp"
#include "fairmdp/lp.hpp"
#include "fairmdp/mdp.hpp"
#include "fairmdp/rng.hpp"

namespace oracle {

using namespace fairmdp;

// ---------------------------------------------------------------------------
// Value iteration (unconstrained optimum), reward normalized like evaluate().
inline double value_iteration_optimum(const TabularMdp& mdp, double tol = 1e-12,
                                      int max_iters = 100000) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(mdp.n_states);
    for (int it = 0; it < max_iters; ++it) {
        Eigen::VectorXd next(mdp.n_states);
        for (int s = 0; s < mdp.n_states; ++s) {
            double best = -1e300;
            for (int a = 0; a < mdp.n_actions; ++a) {
                double q = mdp.reward(s, a) + mdp.discount * mdp.transitions[a].row(s).dot(v);
                best = std::max(best, q);
            }
            next(s) = best;
        }
        const double delta = (next - v).cwiseAbs().maxCoeff();
        v = next;
        if (delta < tol * (1.0 - mdp.discount)) break;
    }
    return mdp.initial.dot(v);
}

// Unconstrained finite-horizon optimum by backward induction (total reward
// over T steps, matching evaluate's finite-horizon normalization).
inline double backward_induction_optimum(const TabularMdp& mdp, int horizon) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(mdp.n_states);
    for (int t = horizon - 1; t >= 0; --t) {
        Eigen::VectorXd next(mdp.n_states);
        for (int s = 0; s < mdp.n_states; ++s) {
            double best = -1e300;
            for (int a = 0; a < mdp.n_actions; ++a)
                best = std::max(best, mdp.reward(s, a) + mdp.transitions[a].row(s).dot(v));
            next(s) = best;
        }
        v = next;
    }
    return mdp.initial.dot(v);
}

// ---------------------------------------------------------------------------
// Truncated power-series occupancy: (1-g) sum_{t<terms} g^t D^(pi,t) pi.
inline Eigen::MatrixXd truncated_series_occupancy(const TabularMdp& mdp,
                                                  const StochasticPolicy& policy, int terms) {
    const Eigen::MatrixXd p_pi = induced_transition(mdp, policy);
    Eigen::VectorXd dt = mdp.initial;
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(mdp.n_states);
    double w = 1.0;
    for (int t = 0; t < terms; ++t) {
        acc += w * dt;
        dt = propagate(p_pi, dt);
        w *= mdp.discount;
    }
    acc *= (1.0 - mdp.discount);
    return acc.asDiagonal() * policy.pi;
}

// ---------------------------------------------------------------------------
// Exhaustive enumeration of basic solutions for small equality-form LPs
// (after splitting free variables), the independent optimum oracle.
struct EnumerationResult {
    bool feasible = false;
    double objective = 0.0;
};

inline EnumerationResult enumerate_basic_solutions(const LinearProgram& lp) {
    const int n0 = lp.n_vars();
    const int m = lp.n_constraints();
    int n = n0;
    for (auto s : lp.signs)
        if (s == VarSign::Free) ++n;
    Eigen::MatrixXd a(m, n);
    Eigen::VectorXd c(n);
    a.leftCols(n0) = lp.equality;
    c.head(n0) = lp.objective;
    int extra = n0;
    for (int j = 0; j < n0; ++j)
        if (lp.signs[std::size_t(j)] == VarSign::Free) {
            a.col(extra) = -lp.equality.col(j);
            c(extra) = -lp.objective(j);
            ++extra;
        }

    EnumerationResult best;
    std::vector<int> pick(static_cast<std::size_t>(m));
    std::vector<int> columns;
    for (int j = 0; j < n; ++j) columns.push_back(j);

    // Iterate over all m-subsets of columns.
    std::vector<int> idx(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) idx[std::size_t(i)] = i;
    if (m > n) return best;
    for (;;) {
        Eigen::MatrixXd basis(m, m);
        for (int i = 0; i < m; ++i) basis.col(i) = a.col(idx[std::size_t(i)]);
        Eigen::FullPivLU<Eigen::MatrixXd> lu(basis);
        if (lu.isInvertible()) {
            const Eigen::VectorXd xb = lu.solve(lp.rhs);
            if ((xb.array() >= -1e-9).all()) {
                double obj = 0.0;
                for (int i = 0; i < m; ++i) obj += c(idx[std::size_t(i)]) * xb(i);
                if (!best.feasible || obj > best.objective) {
                    best.feasible = true;
                    best.objective = obj;
                }
            }
        }
        // next combination
        int i = m - 1;
        while (i >= 0 && idx[std::size_t(i)] == n - m + i) --i;
        if (i < 0) break;
        ++idx[std::size_t(i)];
        for (int j = i + 1; j < m; ++j) idx[std::size_t(j)] = idx[std::size_t(j - 1)] + 1;
    }
    return best;
}

// ---------------------------------------------------------------------------
// Random model generators.
inline Eigen::VectorXd random_distribution(int n, Rng& rng) {
    Eigen::VectorXd d(n);
    for (int i = 0; i < n; ++i) d(i) = -std::log(1.0 - rng.uniform());
    d /= d.sum();
    return d;
}

inline TabularMdp random_mdp(int n_states, int n_actions, double discount, Rng& rng) {
    TabularMdp mdp;
    mdp.n_states = n_states;
    mdp.n_actions = n_actions;
    mdp.discount = discount;
    mdp.initial = random_distribution(n_states, rng);
    mdp.transitions.assign(std::size_t(n_actions), Eigen::MatrixXd::Zero(n_states, n_states));
    for (int a = 0; a < n_actions; ++a)
        for (int s = 0; s < n_states; ++s)
            mdp.transitions[std::size_t(a)].row(s) = random_distribution(n_states, rng).transpose();
    mdp.reward = Eigen::MatrixXd::Zero(n_states, n_actions);
    mdp.agent_reward = Eigen::MatrixXd::Zero(n_states, n_actions);
    for (int s = 0; s < n_states; ++s)
        for (int a = 0; a < n_actions; ++a) {
            mdp.reward(s, a) = rng.uniform(-1.0, 1.0);
            mdp.agent_reward(s, a) = rng.uniform(0.0, 1.0);
        }
    mdp.group_of.assign(std::size_t(n_states), Group::Maj);
    for (int s = n_states / 2; s < n_states; ++s) mdp.group_of[std::size_t(s)] = Group::Min;
    return mdp;
}

inline StochasticPolicy random_policy(int n_states, int n_actions, Rng& rng) {
    StochasticPolicy p;
    p.pi = Eigen::MatrixXd::Zero(n_states, n_actions);
    for (int s = 0; s < n_states; ++s)
        p.pi.row(s) = random_distribution(n_actions, rng).transpose();
    return p;
}

// Separable MDP: two halves (maj = states [0, half), min = [half, n)), no
// cross transitions, both halves with positive initial mass.
inline TabularMdp random_separable_mdp(int half_maj, int half_min, int n_actions,
                                       double discount, Rng& rng) {
    const int n = half_maj + half_min;
    TabularMdp mdp = random_mdp(n, n_actions, discount, rng);
    mdp.group_of.assign(std::size_t(n), Group::Maj);
    for (int s = half_maj; s < n; ++s) mdp.group_of[std::size_t(s)] = Group::Min;
    for (int a = 0; a < n_actions; ++a)
        for (int s = 0; s < n; ++s) {
            const bool maj = s < half_maj;
            const int lo = maj ? 0 : half_maj;
            const int hi = maj ? half_maj : n;
            Eigen::VectorXd row = Eigen::VectorXd::Zero(n);
            const Eigen::VectorXd inner = random_distribution(hi - lo, rng);
            for (int s2 = lo; s2 < hi; ++s2) row(s2) = inner(s2 - lo);
            mdp.transitions[std::size_t(a)].row(s) = row.transpose();
        }
    return mdp;
}

// ---------------------------------------------------------------------------
// Grid-search fair-policy oracle for two-action separable MDPs whose policy
// only matters at three decision states: one on the maj side (parameter x),
// two on the min side (y, z). All other states are action-identical, so the
// full policy space is behaviorally this 3-parameter family. For each (x, y)
// grid point the parity residual g(z) = v_maj(x) - v_min(y, z) is bracketed
// and bisected; every root is an exactly-fair candidate.
struct GridOracleResult {
    bool found = false;
    double best_reward = -1e300;
};

struct ThreeParamMdp {
    TabularMdp mdp;
    int maj_decision = 0;
    int min_decision_a = 0;
    int min_decision_b = 0;
};

// Random instance: 3 maj states, 3 min states, 2 actions; decision states
// are maj 0 and min {half, half+1}; the remaining states have identical
// actions (same transitions and both reward tables).
inline ThreeParamMdp random_three_param_mdp(double discount, Rng& rng) {
    ThreeParamMdp out;
    out.mdp = random_separable_mdp(3, 3, 2, discount, rng);
    out.maj_decision = 0;
    out.min_decision_a = 3;
    out.min_decision_b = 4;
    for (int s = 0; s < 6; ++s) {
        if (s == out.maj_decision || s == out.min_decision_a || s == out.min_decision_b)
            continue;
        out.mdp.transitions[1].row(s) = out.mdp.transitions[0].row(s);
        out.mdp.reward(s, 1) = out.mdp.reward(s, 0);
        out.mdp.agent_reward(s, 1) = out.mdp.agent_reward(s, 0);
    }
    return out;
}

inline StochasticPolicy three_param_policy(const ThreeParamMdp& instance, double x, double y,
                                           double z) {
    StochasticPolicy p = StochasticPolicy::uniform(instance.mdp.n_states, 2);
    auto set = [&](int s, double offer) {
        p.pi(s, 0) = 1.0 - offer;
        p.pi(s, 1) = offer;
    };
    set(instance.maj_decision, x);
    set(instance.min_decision_a, y);
    set(instance.min_decision_b, z);
    return p;
}

// Best reward among policies with |gap| <= gap_tol found by a grid over
// (x, y) and bisection on z (plus endpoint checks).
inline GridOracleResult grid_search_fair_oracle(const ThreeParamMdp& instance,
                                                const FairnessSpec& spec, int grid,
                                                double gap_tol) {
    GridOracleResult result;
    auto signed_gap = [&](double x, double y, double z) {
        const EvalReport r =
            evaluate(instance.mdp, three_param_policy(instance, x, y, z), spec);
        return r.group_agent_rewards.at(Group::Maj) - r.group_agent_rewards.at(Group::Min);
    };
    auto consider = [&](double x, double y, double z) {
        const StochasticPolicy p = three_param_policy(instance, x, y, z);
        const EvalReport r = evaluate(instance.mdp, p, spec);
        if (r.gap <= gap_tol && r.reward > result.best_reward) {
            result.found = true;
            result.best_reward = r.reward;
        }
    };
    for (int ix = 0; ix <= grid; ++ix) {
        const double x = double(ix) / grid;
        for (int iy = 0; iy <= grid; ++iy) {
            const double y = double(iy) / grid;
            // scan z for sign changes of the parity residual
            const int zscan = grid;
            double prev = signed_gap(x, y, 0.0);
            if (std::abs(prev) <= gap_tol) consider(x, y, 0.0);
            for (int iz = 1; iz <= zscan; ++iz) {
                const double z = double(iz) / zscan;
                const double cur = signed_gap(x, y, z);
                if (std::abs(cur) <= gap_tol) consider(x, y, z);
                if ((prev < 0) != (cur < 0)) {
                    double lo = double(iz - 1) / zscan, hi = z;
                    double flo = prev;
                    for (int it = 0; it < 60; ++it) {
                        const double mid = 0.5 * (lo + hi);
                        const double fmid = signed_gap(x, y, mid);
                        if ((fmid < 0) == (flo < 0)) {
                            lo = mid;
                            flo = fmid;
                        } else {
                            hi = mid;
                        }
                    }
                    consider(x, y, 0.5 * (lo + hi));
                }
                prev = cur;
            }
        }
    }
    return result;
}

// ---------------------------------------------------------------------------
// Regularized incomplete beta function I_x(a, b) by continued fraction.
inline double betacf(double a, double b, double x) {
    constexpr int kMaxIter = 300;
    constexpr double eps = 3e-14, fpmin = 1e-300;
    const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0, d = 1.0 - qab * x / qap;
    if (std::abs(d) < fpmin) d = fpmin;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < fpmin) d = fpmin;
        c = 1.0 + aa / c;
        if (std::abs(c) < fpmin) c = fpmin;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < fpmin) d = fpmin;
        c = 1.0 + aa / c;
        if (std::abs(c) < fpmin) c = fpmin;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < eps) break;
    }
    return h;
}

inline double beta_cdf(double x, double a, double b) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double ln_bt = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                         a * std::log(x) + b * std::log(1.0 - x);
    const double bt = std::exp(ln_bt);
    if (x < (a + 1.0) / (a + b + 2.0)) return bt * betacf(a, b, x) / a;
    return 1.0 - bt * betacf(b, a, 1.0 - x) / b;
}

// ---------------------------------------------------------------------------
// Mean and standard error.
struct MeanSe {
    double mean = 0.0;
    double se = 0.0;
};

inline MeanSe mean_se(const std::vector<double>& xs) {
    MeanSe out;
    for (double x : xs) out.mean += x;
    out.mean /= double(xs.size());
    double var = 0.0;
    for (double x : xs) var += (x - out.mean) * (x - out.mean);
    if (xs.size() > 1) var /= double(xs.size() - 1);
    out.se = std::sqrt(var / double(xs.size()));
    return out;
}

} // namespace oracle

#pragma once

#include "fairmdp/lp.hpp"
#include "fairmdp/mdp.hpp"

namespace fairmdp {

/// Outcome of the occupancy-measure fair solves.
struct FairSolveResult {
    enum class Status { Fair, Infeasible } status = Status::Infeasible;
    StochasticPolicy policy;            // extracted stationary policy
    TimeDependentPolicy time_policy;    // filled by the finite-horizon solve
    Eigen::MatrixXd lambda;             // lambda*(s,a) (summed over layers
                                        // for the finite-horizon solve)
    double common_value = 0.0;          // c*
    double lp_objective = 0.0;
    double reward = 0.0;                // re-evaluated via mdp evaluation
    double gap = 0.0;                   // exact parity gap of the policy
    // Conservative diagnostic: whether sum_a pi(s,a) rho(s,a) is constant
    // across states within 1e-6 (the policy-level one-step condition).
    bool policy_level_parity = false;
};

/// Occupancy-measure LP for the demographic-parity-constrained problem on a
/// separable MDP: variables lambda(s,a) >= 0 and free c, flow constraint per
/// state, one parity row per group (relaxed to |v_z - c| <= eps/2 when
/// spec.epsilon > 0, which makes the feasible set exactly the gap <= eps
/// policies). Variable layout: lambda row-major (s*|A|+a), then c, then any
/// tolerance slacks.
LinearProgram build_fair_lp(const TabularMdp& mdp, const FairnessSpec& spec);

/// Conservative variant: one parity row per state, sum_a lambda(s,a)
/// rho(s,a) = c, with the same scalar c for every state.
LinearProgram build_conservative_lp(const TabularMdp& mdp, const FairnessSpec& spec);

/// Solve + policy extraction (pi = lambda / row sum; unreached states get
/// the uniform distribution) + exact re-evaluation.
FairSolveResult solve_fair(const TabularMdp& mdp, const FairnessSpec& spec);
FairSolveResult solve_conservative(const TabularMdp& mdp, const FairnessSpec& spec);

/// Exact fair solve of the episodic undiscounted problem over horizon T via
/// the layered (time-expanded) occupancy LP; the extracted policy is
/// time-dependent. Parity tolerance handling matches build_fair_lp.
FairSolveResult solve_fair_finite(const TabularMdp& mdp, const FairnessSpec& spec, int horizon);

} // namespace fairmdp

#pragma once

#include <cstdint>
#include <vector>

#include "fairmdp/env.hpp"
#include "fairmdp/fair_lp.hpp"

namespace fairmdp {

/// Empirical transition frequencies with uniform fallback for unvisited
/// state-action pairs (flagged).
struct TransitionEstimate {
    std::vector<Eigen::MatrixXd> counts; // per action, (s, s')
    std::vector<Eigen::MatrixXd> p_hat;  // row-stochastic
    Eigen::MatrixXd visits;              // per (s, a)
    std::vector<std::pair<int, int>> unvisited;

    /// Max-entry deviation from a reference transition tensor.
    double max_deviation(const std::vector<Eigen::MatrixXd>& reference) const;
};

TransitionEstimate estimate_transitions(const std::vector<Eigen::MatrixXd>& counts);

/// Accumulate (s, a, s') counts from tabular rollouts.
void count_transitions(const std::vector<Rollout>& rollouts,
                       std::vector<Eigen::MatrixXd>& counts);

struct EtcConfig {
    long long total_episodes = 0;   // N
    long long explore_episodes = 0; // N0
    StochasticPolicy explore_policy;
    int horizon = 0;                // T; episodic, gamma = 1
    double epsilon = 0.1;           // commitment solves with tolerance eps/2
    double delta = 0.05;
    double exploration_floor = 0.0; // lambda0, verified exactly before running
    std::uint64_t seed = 0;

    /// The published exploration budget
    /// N0 = 128 T^2 |S|^2 R_max^2 log(2 |S|^2 |A| / delta) / (lambda0^2 eps^2);
    /// astronomically large at desk scale, exposed as the default.
    static double theorem_explore_episodes(int horizon, int n_states, int n_actions,
                                           double r_max, double delta, double lambda0,
                                           double epsilon);
};

struct EtcResult {
    TimeDependentPolicy committed;
    bool fallback = false; // fair LP on the estimated model was infeasible
    std::vector<double> episode_rewards;  // realized, one per episode
    std::vector<double> cumulative_regret; // expected regret vs the comparator
    double comparator_reward = 0.0; // optimal eps/4-fair value, true model
    double committed_reward = 0.0;  // exact value of the committed policy
    double committed_gap = 0.0;     // exact parity gap on the true model
    TransitionEstimate estimate;
};

/// Explore with pi0 for N0 episodes, estimate P, solve the eps/2-tolerant
/// fair problem on the estimated model (time-expanded LP), commit. The
/// environment supplies the hidden true dynamics; D, R, rho are known.
/// `inject_p_hat`, when nonempty, replaces the estimate (oracle injection
/// for tests).
EtcResult explore_then_commit(const TabularEnv& env, const EtcConfig& cfg,
                              const FairnessSpec& spec,
                              const std::vector<Eigen::MatrixXd>& inject_p_hat = {});

struct RegretPoint {
    long long episodes = 0; // N
    double regret = 0.0;
    double epsilon = 0.0;   // N^(-2/3)
};

/// Regret over a grid of N with eps = N^(-2/3) and N0 proportional to
/// N^(2/3); each point averages `repeats` independent runs.
std::vector<RegretPoint> regret_curve(const TabularEnv& env, const StochasticPolicy& pi0,
                                      const std::vector<long long>& episode_grid,
                                      int horizon, double explore_scale, int repeats,
                                      std::uint64_t seed);

/// Least-squares slope of log(regret) against log(N).
double fit_loglog_slope(const std::vector<RegretPoint>& curve);

/// Stationary distribution of a row-stochastic chain by repeated squaring
/// from every basis start; errors out (NumericalError) when the starts do
/// not agree, i.e. the chain is not ergodic.
Eigen::VectorXd stationary_distribution(const Eigen::MatrixXd& p_pi, double tol);

/// Smallest T such that every basis start is within eps0 of the stationary
/// distribution in the max norm after T steps. Checking the simplex
/// vertices suffices: the deviation is convex in the start, so its maximum
/// over the simplex is attained at a vertex. Iteration cap 1e6.
int mixing_time(const Eigen::MatrixXd& p_pi, double eps0);

struct UnknownInitResult {
    StochasticPolicy policy;   // pi~ (or pi0 on fallback)
    int mixing_steps = 0;      // T0: run pi0 this long before switching
    double eps0 = 0.0;         // (1-gamma) eps / (8 |S| R_max)
    bool fallback = false;
    FairSolveResult solve;     // the Algorithm-1 solve on the mixed model
};

/// Unknown-initial-distribution workflow: mix under pi0, then solve the
/// eps/2-tolerant fair problem on the model whose initial distribution is
/// the stationary distribution of pi0.
UnknownInitResult unknown_init_workflow(const TabularMdp& mdp, const StochasticPolicy& pi0,
                                        double epsilon, const FairnessSpec& spec);

} // namespace fairmdp

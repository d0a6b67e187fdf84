#pragma once

#include <Eigen/Dense>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fairmdp/errors.hpp"

namespace fairmdp {

enum class Group { Maj = 0, Min = 1 };

inline const char* group_name(Group z) { return z == Group::Maj ? "maj" : "min"; }

/// Finite MDP with the sensitive attribute factored into the state space.
/// transitions[a] is the |S| x |S| row-stochastic matrix for action a.
struct TabularMdp {
    int n_states = 0;
    int n_actions = 0;
    Eigen::VectorXd initial;                  // D, sums to 1
    std::vector<Eigen::MatrixXd> transitions; // per action, rows s -> cols s'
    Eigen::MatrixXd reward;                   // R(s,a), decision-maker
    Eigen::MatrixXd agent_reward;             // rho(s,a), individual outcome
    double discount = 0.0;                    // gamma in [0,1); 1 allowed in
                                              // finite-horizon evaluation only
    std::vector<Group> group_of;              // Z component of S = Z x S~

    double p(int s, int a, int s2) const { return transitions[a](s, s2); }

    /// Throws ValidationError naming the offending field/index.
    void validate() const;

    /// Largest |R| entry; max over agent rewards too when with_agent.
    double reward_bound(bool with_agent = true) const;
};

/// Tabular stochastic policy: pi(s,a), each row a distribution.
struct StochasticPolicy {
    Eigen::MatrixXd pi;

    static StochasticPolicy uniform(int n_states, int n_actions);
    /// One-action-per-state policy.
    static StochasticPolicy deterministic(const std::vector<int>& actions, int n_actions);

    void validate(int n_states, int n_actions) const;
};

enum class FairnessCriterion { DemographicParity, EqualOpportunity, PathSpecific };

/// Whether group-conditioned occupancies condition on the initial state's
/// group (Def.-1 style) or the current state's group. The two coincide on
/// separable MDPs; initial-state is the default everywhere.
enum class Conditioning { InitialState, CurrentState };

/// Group-defining subsets of initial states plus the tolerance. Demographic
/// parity, equality of opportunity and path-specific fairness all reduce to
/// a pair of initial-state subsets (or explicit initial distributions), so
/// they share this one spec type.
struct FairnessSpec {
    std::vector<int> maj_states; // S_maj: initial states defining the maj side
    std::vector<int> min_states; // S_min
    double epsilon = 0.0;
    FairnessCriterion criterion = FairnessCriterion::DemographicParity;
    Conditioning conditioning = Conditioning::InitialState;

    // Optional explicit per-group initial distributions (path-specific causal
    // fairness). When set they override the subset-restriction of D.
    std::optional<Eigen::VectorXd> maj_initial;
    std::optional<Eigen::VectorXd> min_initial;

    /// All states of each group, per mdp.group_of (plain demographic parity).
    static FairnessSpec demographic_parity(const TabularMdp& mdp, double epsilon = 0.0);

    const std::vector<int>& states_of(Group z) const {
        return z == Group::Maj ? maj_states : min_states;
    }
};

/// Evaluation mode is always explicit, never inferred from gamma.
struct EvalMode {
    enum Kind { Discounted, FiniteHorizon } kind = Discounted;
    int horizon = 0; // required for FiniteHorizon

    static EvalMode discounted() { return {Discounted, 0}; }
    static EvalMode finite(int T) { return {FiniteHorizon, T}; }
};

/// Time-discounted (or horizon-averaged) state-action distribution and its
/// group-conditioned variants. lambda sums to 1; lambda.row(s).sum() == d(s).
struct OccupancyMeasure {
    Eigen::MatrixXd lambda;     // Lambda(s,a)
    Eigen::VectorXd d;          // marginal state distribution D^(pi)
    Eigen::MatrixXd lambda_maj; // Lambda conditioned on the maj group
    Eigen::MatrixXd lambda_min;
    double p_maj = 0.0;         // initial mass of each group subset
    double p_min = 0.0;
};

struct EvalReport {
    double reward = 0.0;               // decision-maker value
    std::map<Group, double> group_agent_rewards;
    double gap = 0.0;                  // |rho_maj - rho_min|
    bool within_tolerance = false;     // gap <= spec.epsilon
};

/// P^(pi): result[s,s'] = sum_a pi(s,a) P(s,a,s'). Row-stochastic.
Eigen::MatrixXd induced_transition(const TabularMdp& mdp, const StochasticPolicy& policy);

/// Propagate a state distribution one step: out_s' = sum_s d_s P^(pi)_{s,s'}.
Eigen::VectorXd propagate(const Eigen::MatrixXd& p_pi, const Eigen::VectorXd& d);

/// Marginal state distribution for the given mode. Discounted: direct dense
/// solve of (I - gamma P^(pi))^T d = (1-gamma) D. Finite horizon:
/// d = (1/T) sum_{t<T} D^(pi,t).
Eigen::VectorXd state_distribution(const TabularMdp& mdp, const StochasticPolicy& policy,
                                   const Eigen::VectorXd& start, EvalMode mode);

/// Full occupancy with group conditioning per `spec`.
OccupancyMeasure discounted_occupancy(const TabularMdp& mdp, const StochasticPolicy& policy,
                                      const FairnessSpec& spec,
                                      EvalMode mode = EvalMode::discounted());

/// Exact policy evaluation: reward, per-group agent values, parity gap.
/// Reward carries the (1-gamma)^-1 factor in discounted mode and the factor
/// T in finite-horizon mode, so it equals the expected cumulative sum; group
/// values are expectations under the normalized conditioned occupancies.
EvalReport evaluate(const TabularMdp& mdp, const StochasticPolicy& policy,
                    const FairnessSpec& spec, EvalMode mode = EvalMode::discounted());

/// Nonstationary policy for finite-horizon problems (one table per step).
struct TimeDependentPolicy {
    std::vector<StochasticPolicy> by_time;

    int horizon() const { return int(by_time.size()); }
    static TimeDependentPolicy stationary(const StochasticPolicy& policy, int horizon);
};

/// Exact finite-horizon evaluation of a nonstationary policy; same
/// normalization as `evaluate` with EvalMode::finite(T).
EvalReport evaluate_finite(const TabularMdp& mdp, const TimeDependentPolicy& policy,
                           const FairnessSpec& spec);

/// First transition with positive probability that changes the group
/// component, or nullopt if the MDP is separable (group-preserving).
struct SeparabilityViolation {
    int s, a, s2;
    double prob;
};
std::optional<SeparabilityViolation> separability_violation(const TabularMdp& mdp);

/// True iff rho(s,a) is the same for every s (Theorem-2 precondition).
bool state_independent_agent_rewards(const TabularMdp& mdp, double tol = 1e-12);

} // namespace fairmdp

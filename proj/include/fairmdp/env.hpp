#pragma once

#include <memory>
#include <vector>

#include "fairmdp/mdp.hpp"
#include "fairmdp/rng.hpp"

namespace fairmdp {

/// Environment state as seen by rollouts and policies. Tabular environments
/// fill `index`; continuous ones carry their payload in `data`.
struct EnvState {
    Group group = Group::Maj;
    bool qualified = true;
    int index = -1;
    std::vector<double> data;
};

/// Episodic simulation interface. Implementations are stateless across
/// episodes: all randomness flows through the generator argument, so rollout
/// batches can be produced from independently derived streams in any order.
class Environment {
public:
    virtual ~Environment() = default;

    virtual int n_actions() const = 0;
    /// Natural episode length for this environment.
    virtual int horizon() const = 0;

    virtual EnvState reset(Rng& rng) const = 0;

    /// Initial state conditioned on group membership (and, for equality of
    /// opportunity, on the qualified flag). Default: rejection sampling.
    virtual EnvState reset_conditioned(Group z, bool require_qualified, Rng& rng) const;

    struct StepResult {
        EnvState next;
        double reward = 0.0;
        double agent_reward = 0.0;
    };
    virtual StepResult step(const EnvState& state, int action, Rng& rng) const = 0;

    /// One-step expected agent reward of `action` at `state` (used by the
    /// optimistic trainer's dynamics-free constraint estimate).
    virtual double expected_agent_reward(const EnvState& state, int action) const;
};

/// Maps environment states to action distributions.
class Policy {
public:
    virtual ~Policy() = default;
    virtual void action_probs(const EnvState& state, std::vector<double>& out) const = 0;

    int sample_action(const EnvState& state, Rng& rng) const {
        std::vector<double> probs;
        action_probs(state, probs);
        return rng.categorical(probs);
    }
};

/// Adapter running a tabular policy against a tabular environment.
class TabularPolicyView final : public Policy {
public:
    explicit TabularPolicyView(const StochasticPolicy& policy) : policy_(&policy) {}
    void action_probs(const EnvState& state, std::vector<double>& out) const override;

private:
    const StochasticPolicy* policy_;
};

struct RolloutStep {
    int state_index = -1;
    int action = 0;
    double reward = 0.0;
    double agent_reward = 0.0;
};

/// One sampled trajectory of fixed length T together with the initial
/// group/qualified labels used for group-conditioned estimation.
struct Rollout {
    Group group = Group::Maj;
    bool qualified = true;
    std::vector<RolloutStep> steps;
    int final_state = -1; // tabular successor of the last step
};

/// Sample one length-T rollout. Deterministic given the generator state.
Rollout sample_rollout(const Environment& env, const Policy& policy, int horizon, Rng& rng);

/// As above but from a provided initial state (already reset).
Rollout sample_rollout_from(const Environment& env, const Policy& policy, EnvState state,
                            int horizon, Rng& rng);

struct RolloutEstimate {
    double reward = 0.0;  // R-hat
    double rho_maj = 0.0; // group-conditioned agent values
    double rho_min = 0.0;
    double gap = 0.0;     // eps-hat = |rho_maj - rho_min|
};

/// Monte Carlo estimates matching `evaluate`'s normalization: R-hat is the
/// mean cumulative (discounted) reward; rho-hat_z is the mean cumulative
/// agent reward scaled by (1-gamma) in discounted mode and by 1/T in
/// finite-horizon mode. The three batches must be sampled independently
/// (Theorem-4 requirement); callers construct them from separate streams.
RolloutEstimate estimate_from_rollouts(const std::vector<Rollout>& reward_batch,
                                       const std::vector<Rollout>& maj_batch,
                                       const std::vector<Rollout>& min_batch,
                                       double discount, EvalMode mode);

/// Cumulative (discounted) sums for a single rollout, without group scaling.
double rollout_reward_sum(const Rollout& rollout, double discount);
double rollout_agent_sum(const Rollout& rollout, double discount);

/// Tabular environment wrapping a TabularMdp. The qualified flag comes from
/// an optional per-state predicate (used by equality-of-opportunity specs).
class TabularEnv final : public Environment {
public:
    TabularEnv(const TabularMdp& mdp, int horizon,
               std::vector<bool> qualified_of = {});

    int n_actions() const override { return mdp_.n_actions; }
    int horizon() const override { return horizon_; }
    EnvState reset(Rng& rng) const override;
    EnvState reset_conditioned(Group z, bool require_qualified, Rng& rng) const override;
    StepResult step(const EnvState& state, int action, Rng& rng) const override;
    double expected_agent_reward(const EnvState& state, int action) const override;

    const TabularMdp& mdp() const { return mdp_; }

private:
    EnvState make_state(int s) const;

    TabularMdp mdp_;
    int horizon_;
    std::vector<bool> qualified_of_;
};

} // namespace fairmdp

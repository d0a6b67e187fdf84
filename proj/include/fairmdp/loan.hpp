#pragma once

#include "fairmdp/env.hpp"
#include "fairmdp/loan_params.hpp"

namespace fairmdp {

/// View over the EnvState payload of the loan environment.
/// data = { alpha, beta, hidden p, decision-step counter t }.
struct LoanState {
    Group group;
    double alpha;
    double beta;
    double p; // hidden true repayment probability, fixed per episode
    int t;

    double belief_mean() const { return alpha / (alpha + beta); }

    static LoanState of(const EnvState& s) {
        return {s.group, s.data[0], s.data[1], s.data[2], int(s.data[3])};
    }
};

/// Belief MDP over Beta posteriors of an applicant's repayment probability.
/// Action 1 offers a loan (Bernoulli(p) repayment updates the belief, bank
/// earns the belief-based expected profit minus the risk term), action 0
/// denies (beta += tau, zero rewards). The episode starts with z ~
/// Bernoulli(p_Z), p ~ Beta(alpha_z, beta_z), followed by T_z forced offers
/// that update the belief but accrue no reward and consume no horizon.
class LoanEnv final : public Environment {
public:
    explicit LoanEnv(LoanParams params);

    int n_actions() const override { return 2; }
    int horizon() const override { return params_.horizon; }
    EnvState reset(Rng& rng) const override;
    EnvState reset_conditioned(Group z, bool require_qualified, Rng& rng) const override;
    StepResult step(const EnvState& state, int action, Rng& rng) const override;
    double expected_agent_reward(const EnvState& state, int action) const override {
        (void)state;
        return action == 1 ? 1.0 : 0.0;
    }

    const LoanParams& params() const { return params_; }

    /// Belief-based bank reward of an offer at belief mean p_hat:
    /// p_hat (I+1) - 1 - lambda (I+1) sqrt(p_hat (1 - p_hat)).
    double offer_reward(double belief_mean) const;

    /// Hidden-p qualification test (equality of opportunity).
    bool qualified(const LoanState& state) const {
        return state.p >= params_.qualify_threshold;
    }

    /// Policy features: [1, belief mean, log(alpha+beta), 1(z = min)];
    /// race-blind mode drops the group indicator.
    static void features(const EnvState& state, bool race_blind, std::vector<double>& out);
    static int feature_size(bool race_blind) { return race_blind ? 3 : 4; }

private:
    EnvState reset_with_group(Group z, Rng& rng) const;

    LoanParams params_;
};

} // namespace fairmdp

#include "fairmdp/env.hpp"

#include <cmath>

namespace fairmdp {

EnvState Environment::reset_conditioned(Group z, bool require_qualified, Rng& rng) const {
    // Rejection sampling against the unconditioned initial distribution.
    constexpr int kMaxTries = 1000000;
    for (int i = 0; i < kMaxTries; ++i) {
        EnvState s = reset(rng);
        if (s.group == z && (!require_qualified || s.qualified)) return s;
    }
    throw EmptyGroupError(std::string("reset_conditioned: no ") + group_name(z) +
                          (require_qualified ? " qualified" : "") +
                          " initial states after 1e6 draws");
}

double Environment::expected_agent_reward(const EnvState&, int) const {
    throw ValidationError("expected_agent_reward not provided by this environment");
}

void TabularPolicyView::action_probs(const EnvState& state, std::vector<double>& out) const {
    if (state.index < 0 || state.index >= policy_->pi.rows())
        throw ValidationError("tabular policy applied to non-tabular state");
    out.resize(std::size_t(policy_->pi.cols()));
    for (int a = 0; a < policy_->pi.cols(); ++a) out[std::size_t(a)] = policy_->pi(state.index, a);
}

Rollout sample_rollout_from(const Environment& env, const Policy& policy, EnvState state,
                            int horizon, Rng& rng) {
    if (horizon < 1) throw ValidationError("rollout horizon must be >= 1");
    Rollout rollout;
    rollout.group = state.group;
    rollout.qualified = state.qualified;
    rollout.steps.reserve(std::size_t(horizon));
    for (int t = 0; t < horizon; ++t) {
        const int action = policy.sample_action(state, rng);
        auto result = env.step(state, action, rng);
        rollout.steps.push_back({state.index, action, result.reward, result.agent_reward});
        state = std::move(result.next);
    }
    rollout.final_state = state.index;
    return rollout;
}

Rollout sample_rollout(const Environment& env, const Policy& policy, int horizon, Rng& rng) {
    return sample_rollout_from(env, policy, env.reset(rng), horizon, rng);
}

double rollout_reward_sum(const Rollout& rollout, double discount) {
    double acc = 0.0, w = 1.0;
    for (const auto& step : rollout.steps) {
        acc += w * step.reward;
        w *= discount;
    }
    return acc;
}

double rollout_agent_sum(const Rollout& rollout, double discount) {
    double acc = 0.0, w = 1.0;
    for (const auto& step : rollout.steps) {
        acc += w * step.agent_reward;
        w *= discount;
    }
    return acc;
}

RolloutEstimate estimate_from_rollouts(const std::vector<Rollout>& reward_batch,
                                       const std::vector<Rollout>& maj_batch,
                                       const std::vector<Rollout>& min_batch,
                                       double discount, EvalMode mode) {
    if (mode.kind == EvalMode::Discounted && !(discount < 1.0))
        throw ValidationError("discounted estimation requires discount < 1");
    if (reward_batch.empty()) throw ValidationError("empty reward batch");
    if (maj_batch.empty()) throw EmptyGroupError("group maj has zero rollouts");
    if (min_batch.empty()) throw EmptyGroupError("group min has zero rollouts");

    RolloutEstimate est;
    for (const auto& z : reward_batch) est.reward += rollout_reward_sum(z, discount);
    est.reward /= double(reward_batch.size());

    auto group_value = [&](const std::vector<Rollout>& batch) {
        double acc = 0.0;
        for (const auto& z : batch) {
            const double scale = mode.kind == EvalMode::Discounted
                                     ? (1.0 - discount)
                                     : 1.0 / double(z.steps.size());
            acc += scale * rollout_agent_sum(z, discount);
        }
        return acc / double(batch.size());
    };
    est.rho_maj = group_value(maj_batch);
    est.rho_min = group_value(min_batch);
    est.gap = std::abs(est.rho_maj - est.rho_min);
    return est;
}

TabularEnv::TabularEnv(const TabularMdp& mdp, int horizon, std::vector<bool> qualified_of)
    : mdp_(mdp), horizon_(horizon), qualified_of_(std::move(qualified_of)) {
    mdp_.validate();
    if (!qualified_of_.empty() && int(qualified_of_.size()) != mdp_.n_states)
        throw ValidationError("qualified_of: wrong length");
}

EnvState TabularEnv::make_state(int s) const {
    EnvState state;
    state.index = s;
    state.group = mdp_.group_of[std::size_t(s)];
    state.qualified = qualified_of_.empty() || qualified_of_[std::size_t(s)];
    return state;
}

EnvState TabularEnv::reset(Rng& rng) const {
    double u = rng.uniform();
    for (int s = 0; s + 1 < mdp_.n_states; ++s) {
        u -= mdp_.initial(s);
        if (u < 0.0) return make_state(s);
    }
    return make_state(mdp_.n_states - 1);
}

EnvState TabularEnv::reset_conditioned(Group z, bool require_qualified, Rng& rng) const {
    double mass = 0.0;
    for (int s = 0; s < mdp_.n_states; ++s)
        if (mdp_.group_of[std::size_t(s)] == z &&
            (!require_qualified || qualified_of_.empty() || qualified_of_[std::size_t(s)]))
            mass += mdp_.initial(s);
    if (mass <= 0.0)
        throw EmptyGroupError(std::string("group ") + group_name(z) +
                              " has zero initial probability");
    double u = rng.uniform() * mass;
    int last = -1;
    for (int s = 0; s < mdp_.n_states; ++s) {
        if (mdp_.group_of[std::size_t(s)] != z) continue;
        if (require_qualified && !qualified_of_.empty() && !qualified_of_[std::size_t(s)]) continue;
        last = s;
        u -= mdp_.initial(s);
        if (u < 0.0) return make_state(s);
    }
    return make_state(last);
}

double TabularEnv::expected_agent_reward(const EnvState& state, int action) const {
    return mdp_.agent_reward(state.index, action);
}

Environment::StepResult TabularEnv::step(const EnvState& state, int action, Rng& rng) const {
    if (state.index < 0 || state.index >= mdp_.n_states)
        throw ValidationError("step: state index out of range");
    if (action < 0 || action >= mdp_.n_actions)
        throw ValidationError("step: action out of range");
    double u = rng.uniform();
    int next = mdp_.n_states - 1;
    for (int s2 = 0; s2 + 1 < mdp_.n_states; ++s2) {
        u -= mdp_.p(state.index, action, s2);
        if (u < 0.0) {
            next = s2;
            break;
        }
    }
    StepResult result;
    result.next = make_state(next);
    result.reward = mdp_.reward(state.index, action);
    result.agent_reward = mdp_.agent_reward(state.index, action);
    return result;
}

} // namespace fairmdp

#include "fairmdp/loan.hpp"

#include <cmath>

namespace fairmdp {

double LoanParams::reward_bound() const {
    return std::max(1.0, interest) + risk_weight * (interest + 1.0) / 2.0;
}

LoanEnv::LoanEnv(LoanParams params) : params_(std::move(params)) { params_.validate(); }

double LoanEnv::offer_reward(double belief_mean) const {
    const double gain = belief_mean * (params_.interest + 1.0) - 1.0;
    const double risk = params_.risk_weight * (params_.interest + 1.0) *
                        std::sqrt(std::max(belief_mean * (1.0 - belief_mean), 0.0));
    return gain - risk;
}

void LoanEnv::features(const EnvState& state, bool race_blind, std::vector<double>& out) {
    const LoanState s = LoanState::of(state);
    out.resize(race_blind ? 3 : 4);
    out[0] = 1.0;
    out[1] = s.belief_mean();
    out[2] = std::log(s.alpha + s.beta);
    if (!race_blind) out[3] = state.group == Group::Min ? 1.0 : 0.0;
}

EnvState LoanEnv::reset_with_group(Group z, Rng& rng) const {
    const bool min = z == Group::Min;
    double alpha = min ? params_.alpha_min : params_.alpha_maj;
    double beta = min ? params_.beta_min : params_.beta_maj;
    const double p = rng.beta(alpha, beta);
    // Forced-exploration offers implement the initial belief distribution;
    // no reward, no horizon consumption.
    const int forced = min ? params_.forced_min : params_.forced_maj;
    for (int i = 0; i < forced; ++i) {
        if (rng.bernoulli(p))
            alpha += 1.0;
        else
            beta += 1.0;
    }
    EnvState state;
    state.group = z;
    state.qualified = p >= params_.qualify_threshold;
    state.data = {alpha, beta, p, 0.0};
    return state;
}

EnvState LoanEnv::reset(Rng& rng) const {
    const Group z = rng.bernoulli(params_.p_minority) ? Group::Min : Group::Maj;
    return reset_with_group(z, rng);
}

EnvState LoanEnv::reset_conditioned(Group z, bool require_qualified, Rng& rng) const {
    if (!require_qualified) return reset_with_group(z, rng);
    constexpr int kMaxTries = 1000000;
    for (int i = 0; i < kMaxTries; ++i) {
        EnvState s = reset_with_group(z, rng);
        if (s.qualified) return s;
    }
    throw EmptyGroupError(std::string("loan env: no qualified ") + group_name(z) +
                          " applicants after 1e6 draws");
}

Environment::StepResult LoanEnv::step(const EnvState& state, int action, Rng& rng) const {
    LoanState s = LoanState::of(state);
    if (s.t >= params_.horizon) throw ValidationError("loan env: horizon exceeded");
    if (action != 0 && action != 1) throw ValidationError("loan env: action out of range");

    StepResult result;
    if (action == 1) {
        result.reward = offer_reward(s.belief_mean()); // pre-update belief
        result.agent_reward = 1.0;
        if (rng.bernoulli(s.p))
            s.alpha += 1.0;
        else
            s.beta += 1.0;
    } else {
        s.beta += params_.denial_penalty;
    }
    s.t += 1;

    result.next = state;
    result.next.data = {s.alpha, s.beta, s.p, double(s.t)};
    return result;
}

} // namespace fairmdp

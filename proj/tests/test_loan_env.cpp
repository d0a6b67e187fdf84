#include <doctest.h>

#include <cmath>

#include "fairmdp/json_io.hpp"
#include "fairmdp/loan.hpp"
#include "oracle_util.hpp"

using namespace fairmdp;

TEST_CASE("loan reset: p_Z = 0 yields only majority applicants") {
    LoanParams params;
    params.p_minority = 0.0;
    const LoanEnv env(params);
    Rng rng(1);
    for (int i = 0; i < 200; ++i) CHECK(env.reset(rng).group == Group::Maj);
}

TEST_CASE("loan reset: minority prior mean and forced-exploration counting") {
    const LoanParams params;
    const LoanEnv env(params);
    Rng rng(2);
    const double prior_mean =
        params.alpha_min / (params.alpha_min + params.beta_min); // ~0.5025
    double acc = 0.0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        const EnvState s = env.reset_conditioned(Group::Min, false, rng);
        const LoanState ls = LoanState::of(s);
        acc += ls.p;
        // T_min forced offers update the belief by exactly one unit each.
        CHECK(ls.alpha + ls.beta ==
              doctest::Approx(params.alpha_min + params.beta_min + params.forced_min)
                  .epsilon(1e-12));
    }
    const double se = 0.35 / std::sqrt(double(n)); // Beta(~.5,~.5) has sd ~ .35
    CHECK(std::abs(acc / n - prior_mean) <= 4.0 * se);
}

TEST_CASE("loan step: offer reward closed form") {
    LoanParams params;
    params.risk_weight = 0.0;
    params.interest = 0.2;
    const LoanEnv env(params);
    CHECK(env.offer_reward(0.5) == doctest::Approx(-0.4)); // 0.5 * 1.2 - 1

    LoanParams risky;
    risky.risk_weight = 3.0; // arbitrary: the variance term vanishes at 0/1
    const LoanEnv env2(risky);
    CHECK(env2.offer_reward(0.0) == doctest::Approx(-1.0));
    CHECK(env2.offer_reward(1.0) == doctest::Approx(risky.interest));
}

TEST_CASE("loan step: deny shifts the belief by tau and pays nothing") {
    const LoanParams params;
    const LoanEnv env(params);
    Rng rng(3);
    const EnvState start = env.reset(rng);
    const LoanState before = LoanState::of(start);
    const auto result = env.step(start, 0, rng);
    const LoanState after = LoanState::of(result.next);
    CHECK(result.reward == 0.0);
    CHECK(result.agent_reward == 0.0);
    CHECK(after.alpha == doctest::Approx(before.alpha).epsilon(1e-15));
    CHECK(after.beta ==
          doctest::Approx(before.beta + params.denial_penalty).epsilon(1e-15));
    CHECK(after.p == before.p); // hidden p is fixed for the episode
    CHECK(after.t == before.t + 1);
}

TEST_CASE("loan step: horizon is enforced") {
    LoanParams params;
    params.horizon = 2;
    params.forced_maj = 0;
    params.forced_min = 0;
    const LoanEnv env(params);
    Rng rng(4);
    EnvState s = env.reset(rng);
    s = env.step(s, 0, rng).next;
    s = env.step(s, 1, rng).next;
    CHECK_THROWS_AS(env.step(s, 0, rng), ValidationError);
}

TEST_CASE("loan features") {
    EnvState state;
    state.group = Group::Maj;
    state.data = {1.0, 1.0, 0.6, 0.0}; // alpha = beta = 1
    std::vector<double> full, blind;
    LoanEnv::features(state, false, full);
    REQUIRE(full.size() == 4);
    CHECK(full[0] == doctest::Approx(1.0));
    CHECK(full[1] == doctest::Approx(0.5));
    CHECK(full[2] == doctest::Approx(std::log(2.0)));
    CHECK(full[3] == doctest::Approx(0.0));

    LoanEnv::features(state, true, blind);
    CHECK(blind.size() == 3);

    EnvState twin = state;
    twin.group = Group::Min;
    std::vector<double> twin_blind;
    LoanEnv::features(twin, true, twin_blind);
    CHECK(blind == twin_blind); // race-blind ignores z
}

TEST_CASE("loan qualification thresholds") {
    LoanParams everyone;
    everyone.qualify_threshold = 0.0;
    LoanParams nobody;
    nobody.qualify_threshold = 1.0;
    const LoanEnv env_all(everyone), env_none(nobody);
    Rng rng(5);
    for (int i = 0; i < 300; ++i) {
        CHECK(env_all.reset(rng).qualified);
        CHECK_FALSE(env_none.reset(rng).qualified); // p = 1 has measure zero
    }
}

TEST_CASE("loan qualification rate matches the Beta tail oracle") {
    const LoanParams params; // p0 = 0.7
    const LoanEnv env(params);
    const double expected =
        1.0 - oracle::beta_cdf(0.7, params.alpha_maj, params.beta_maj);
    Rng rng(6);
    const int n = 40000;
    int qualified = 0;
    for (int i = 0; i < n; ++i)
        if (env.reset_conditioned(Group::Maj, false, rng).qualified) ++qualified;
    const double rate = double(qualified) / n;
    const double se = std::sqrt(expected * (1.0 - expected) / n);
    CHECK(std::abs(rate - expected) <= 3.5 * se);
}

TEST_CASE("loan belief bookkeeping over a mixed action sequence") {
    LoanParams params;
    params.horizon = 40;
    const LoanEnv env(params);
    Rng rng(7);
    EnvState state = env.reset(rng);
    const LoanState start = LoanState::of(state);
    int repaid = 0, defaulted = 0, denials = 0, offers = 0;
    double agent_total = 0.0;
    for (int t = 0; t < params.horizon; ++t) {
        const int action = rng.bernoulli(0.6) ? 1 : 0;
        const LoanState before = LoanState::of(state);
        const auto result = env.step(state, action, rng);
        const LoanState after = LoanState::of(result.next);
        if (action == 1) {
            ++offers;
            if (after.alpha > before.alpha)
                ++repaid;
            else
                ++defaulted;
            // reward bound per step
            CHECK(std::abs(result.reward) <=
                  std::max(1.0, params.interest) +
                      params.risk_weight * (params.interest + 1.0) / 2.0 + 1e-12);
        } else {
            ++denials;
        }
        agent_total += result.agent_reward;
        state = result.next;
    }
    const LoanState end = LoanState::of(state);
    CHECK(end.alpha - start.alpha == doctest::Approx(double(repaid)).epsilon(1e-9));
    CHECK(end.beta - start.beta ==
          doctest::Approx(double(defaulted) + params.denial_penalty * denials).epsilon(1e-9));
    CHECK(agent_total == doctest::Approx(double(offers))); // gap = offer-count gap
}

TEST_CASE("loan with tau = 0: denial is a no-op") {
    LoanParams params;
    params.denial_penalty = 0.0;
    const LoanEnv env(params);
    Rng rng(8);
    const EnvState start = env.reset(rng);
    const auto result = env.step(start, 0, rng);
    CHECK(LoanState::of(result.next).alpha == LoanState::of(start).alpha);
    CHECK(LoanState::of(result.next).beta == LoanState::of(start).beta);
    CHECK(LoanState::of(result.next).p == LoanState::of(start).p);
}

TEST_CASE("loan parameter file ships the published values") {
    const LoanParams params =
        load_loan_params(std::string(FAIRMDP_DATA_DIR) + "/loan_default.json");
    CHECK(params.interest == doctest::Approx(0.17318629).epsilon(1e-12));
    CHECK(params.p_minority == doctest::Approx(0.29294318).epsilon(1e-12));
    CHECK(params.alpha_maj == doctest::Approx(0.65338681).epsilon(1e-12));
    CHECK(params.beta_maj == doctest::Approx(0.20783559).epsilon(1e-12));
    CHECK(params.alpha_min == doctest::Approx(0.48824268).epsilon(1e-12));
    CHECK(params.beta_min == doctest::Approx(0.48346869).epsilon(1e-12));
    CHECK(params.risk_weight == doctest::Approx(0.01).epsilon(1e-12));
    CHECK(params.denial_penalty == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(params.epsilon == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(params.horizon == 50);
    CHECK(params.forced_maj == 10);
    CHECK(params.forced_min == 7);

    LoanParams bad;
    bad.alpha_maj = -1.0;
    CHECK_THROWS_AS(bad.validate(), ValidationError);
    LoanParams bad2;
    bad2.forced_maj = 60; // T_z must stay below T
    CHECK_THROWS_AS(bad2.validate(), ValidationError);
}

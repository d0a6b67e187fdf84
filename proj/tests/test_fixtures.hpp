// Hand-built MDP fixtures shared across the suites.
#pragma once

#include "fairmdp/mdp.hpp"
#include "fairmdp/rng.hpp"
#include "oracle_util.hpp"

namespace fixtures {

using namespace fairmdp;

inline TabularMdp single_state_mdp(double discount) {
    TabularMdp mdp;
    mdp.n_states = 1;
    mdp.n_actions = 1;
    mdp.discount = discount;
    mdp.initial = Eigen::VectorXd::Ones(1);
    mdp.transitions = {Eigen::MatrixXd::Ones(1, 1)};
    mdp.reward = Eigen::MatrixXd::Constant(1, 1, 0.3);
    mdp.agent_reward = Eigen::MatrixXd::Constant(1, 1, 1.0);
    mdp.group_of = {Group::Maj};
    return mdp;
}

// The five-state fixture behind the existence counterexamples: s0,s1 on the
// maj side, s2..s4 on the min side, gamma = 1/2, agent rewards concentrated
// on the absorbing states. The decision-maker reward equals the agent
// reward in the first variant; the second variant zeroes rho(s4).
inline TabularMdp appendix_b(bool infeasible_variant = false) {
    TabularMdp mdp;
    mdp.n_states = 5;
    mdp.n_actions = 2;
    mdp.discount = 0.5;
    mdp.initial = Eigen::VectorXd::Zero(5);
    mdp.initial(0) = 0.5;
    mdp.initial(2) = 0.5;
    mdp.transitions.assign(2, Eigen::MatrixXd::Zero(5, 5));
    for (int a = 0; a < 2; ++a) {
        mdp.transitions[std::size_t(a)](0, 1) = 1.0;
        mdp.transitions[std::size_t(a)](1, 1) = 1.0;
        mdp.transitions[std::size_t(a)](3, 3) = 1.0;
        mdp.transitions[std::size_t(a)](4, 4) = 1.0;
    }
    mdp.transitions[0](2, 3) = 1.0;
    mdp.transitions[1](2, 4) = 1.0;
    mdp.agent_reward = Eigen::MatrixXd::Zero(5, 2);
    mdp.agent_reward.row(1).setConstant(1.0);
    if (!infeasible_variant) mdp.agent_reward.row(4).setConstant(2.0);
    mdp.reward = mdp.agent_reward;
    mdp.group_of = {Group::Maj, Group::Maj, Group::Min, Group::Min, Group::Min};
    return mdp;
}

// Two identical halves: the min side is an exact copy of the maj side, and
// the initial mass is split evenly, so any policy acting identically on
// both halves has zero parity gap.
inline TabularMdp symmetric_copy_mdp(int half_states, int n_actions, double discount,
                                     std::uint64_t seed) {
    Rng rng(seed);
    const TabularMdp half = oracle::random_mdp(half_states, n_actions, discount, rng);
    TabularMdp mdp;
    mdp.n_states = 2 * half_states;
    mdp.n_actions = n_actions;
    mdp.discount = discount;
    mdp.initial = Eigen::VectorXd::Zero(mdp.n_states);
    mdp.initial.head(half_states) = 0.5 * half.initial;
    mdp.initial.tail(half_states) = 0.5 * half.initial;
    mdp.transitions.assign(std::size_t(n_actions),
                           Eigen::MatrixXd::Zero(mdp.n_states, mdp.n_states));
    for (int a = 0; a < n_actions; ++a) {
        mdp.transitions[std::size_t(a)].topLeftCorner(half_states, half_states) =
            half.transitions[std::size_t(a)];
        mdp.transitions[std::size_t(a)].bottomRightCorner(half_states, half_states) =
            half.transitions[std::size_t(a)];
    }
    mdp.reward = Eigen::MatrixXd::Zero(mdp.n_states, n_actions);
    mdp.reward.topRows(half_states) = half.reward;
    mdp.reward.bottomRows(half_states) = half.reward;
    mdp.agent_reward = Eigen::MatrixXd::Zero(mdp.n_states, n_actions);
    mdp.agent_reward.topRows(half_states) = half.agent_reward;
    mdp.agent_reward.bottomRows(half_states) = half.agent_reward;
    mdp.group_of.assign(std::size_t(mdp.n_states), Group::Maj);
    for (int s = half_states; s < mdp.n_states; ++s)
        mdp.group_of[std::size_t(s)] = Group::Min;
    return mdp;
}

// Doubly stochastic two-action separable MDP with uniform initial
// distribution: every policy's occupancy is exactly uniform, so the
// printed per-state conservative LP and the policy-level one-step parity
// condition coincide on it.
inline TabularMdp doubly_stochastic_mdp(int half_states, std::uint64_t seed) {
    Rng rng(seed);
    const int n = 2 * half_states;
    TabularMdp mdp;
    mdp.n_states = n;
    mdp.n_actions = 2;
    mdp.discount = 0.8;
    mdp.initial = Eigen::VectorXd::Constant(n, 1.0 / n);
    mdp.transitions.assign(2, Eigen::MatrixXd::Zero(n, n));
    auto fill_half = [&](int a, int lo) {
        // Random doubly stochastic block by symmetrizing a convex mix of
        // permutation matrices (cyclic shifts).
        Eigen::MatrixXd block = Eigen::MatrixXd::Zero(half_states, half_states);
        Eigen::VectorXd mix = oracle::random_distribution(half_states, rng);
        for (int shift = 0; shift < half_states; ++shift)
            for (int s = 0; s < half_states; ++s)
                block(s, (s + shift) % half_states) += mix(shift);
        for (int s = 0; s < half_states; ++s)
            for (int s2 = 0; s2 < half_states; ++s2)
                mdp.transitions[std::size_t(a)](lo + s, lo + s2) = block(s, s2);
    };
    for (int a = 0; a < 2; ++a) {
        fill_half(a, 0);
        fill_half(a, half_states);
    }
    mdp.reward = Eigen::MatrixXd::Zero(n, 2);
    mdp.agent_reward = Eigen::MatrixXd::Zero(n, 2);
    for (int s = 0; s < n; ++s)
        for (int a = 0; a < 2; ++a) {
            mdp.reward(s, a) = rng.uniform(-1.0, 1.0);
            mdp.agent_reward(s, a) = a == 1 ? 1.0 : 0.0; // state-independent
        }
    mdp.group_of.assign(std::size_t(n), Group::Maj);
    for (int s = half_states; s < n; ++s) mdp.group_of[std::size_t(s)] = Group::Min;
    return mdp;
}

} // namespace fixtures

#pragma once

#include <memory>
#include <string>
#include <vector>

#include "fairmdp/cce.hpp"
#include "fairmdp/loan.hpp"

namespace fairmdp {

/// One column of the loan-experiment grid.
struct LoanMethod {
    std::string name; // rb | dp | eo | opt-dp | opt-eo | cons
    bool race_blind = false;
    bool optimistic = false;
    bool conservative = false;
    bool eo = false;
    bool constrained = false;

    static LoanMethod parse(const std::string& name);
};

/// Policy family for a method: state-independent for cons, otherwise a
/// logistic policy over the loan features (race-blind drops the group bit).
std::unique_ptr<PolicyFamily> loan_policy_family(const LoanMethod& method);

struct LoanRunResult {
    std::vector<double> theta;        // selected restart's distribution mean
    double reward_mean = 0.0;         // fresh-rollout evaluation
    double constraint_value = 0.0;    // exact 0 for cons, else the measured gap
    double constraint_measured = 0.0; // Monte Carlo gap estimate, all methods
    std::vector<IterationStats> trace;
};

/// Train with `restarts` independent Algorithm-2 runs, select by
/// training-internal estimates (tail-window elite reward / elite gap versus
/// the (1-sigma) eps cutoff; never by evaluation data), then evaluate the
/// selected policy with fresh rollouts whose streams are disjoint from all
/// training streams. The equality-of-opportunity methods condition the
/// constraint batches on the qualified flag.
LoanRunResult run_loan_method(const LoanEnv& env, const LoanMethod& method,
                              CceConfig cfg, std::uint64_t seed, int eval_episodes,
                              int restarts);

} // namespace fairmdp

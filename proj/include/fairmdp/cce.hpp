#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "fairmdp/env.hpp"
#include "fairmdp/policy.hpp"

namespace fairmdp {

/// Independent-Gaussian search distribution over policy parameters, stored
/// in moment coordinates: per-coordinate first and second moments of theta.
struct SearchDistribution {
    std::vector<double> first;
    std::vector<double> second;

    static SearchDistribution standard(int dim); // mean 0, variance 1
    int dim() const { return int(first.size()); }
    /// Re-establish second - first^2 >= variance floor.
    void enforce_floor();
};

inline constexpr double kVarianceFloor = 1e-6; // sigma_min^2

struct GaussianParams {
    std::vector<double> mean;
    std::vector<double> variance;
};

/// Exact inverse of the Gaussian moment map with Gamma(theta) = (theta,
/// theta^2) coordinatewise; variance floored at kVarianceFloor.
GaussianParams moment_to_params(const SearchDistribution& eta);

std::vector<double> sample_parameters(const SearchDistribution& eta, Rng& rng);

struct CceConfig {
    int iterations = 100;     // r
    int n_samples = 100;      // n
    int n_elite = 10;         // n', quantile mu = n'/n
    int rollouts = 200;       // m per estimate batch
    int horizon = 0;          // T; 0 selects the environment's horizon
    double smoothing = 0.7;   // alpha
    double sigma = 0.1;       // tolerance fraction in (0, 1/2]
    double epsilon = 0.1;     // fairness tolerance; +inf disables the constraint
    double discount = 1.0;    // rollout discounting; 1 = undiscounted horizon mode
    bool eo_qualified_only = false;  // condition constraint batches on qualified
    bool strict_paper_weights = false; // raw R-hat weights in both phases
    std::uint64_t master_seed = 0;

    void validate() const;
};

/// Sample-size planner: m and T sufficient for the estimation guarantee,
///   m >= 32 R_max (1-gamma) log(6/delta) / (sigma^2 eps^2)
///   T >= log(4 R_max / (sigma^2 eps (1-gamma))) / log(1/gamma),
/// the latter converting the tail bound gamma^T R_max/(1-gamma) <= sigma^2
/// eps / 4 into a step count.
struct PlanResult {
    long long rollouts; // m
    int horizon;        // T
};
PlanResult plan_samples(double r_max, double discount, double epsilon, double sigma,
                        double delta);

namespace detail {

struct SampleScore {
    int index = 0;
    double reward = 0.0; // R-hat
    double gap = 0.0;    // eps-hat
};

/// Elite selection of Algorithm 2: sort by estimated gap ascending (ties:
/// reward descending, then index), count the samples at or below
/// (1-sigma) eps; when at least n' qualify, re-rank those by reward
/// descending and keep the top n', otherwise keep the n' smallest gaps.
std::vector<SampleScore> select_elite(std::vector<SampleScore> scores, int n_elite,
                                      double sigma, double epsilon, bool unconstrained,
                                      int* feasible_count);

/// Nonnegative refit weights: shifted rewards in the objective phase,
/// shifted gap slacks in the constraint phase; uniform when degenerate.
/// Strict-paper mode uses raw R-hat in both phases.
std::vector<double> elite_weights(const std::vector<SampleScore>& elite, bool objective_phase,
                                  bool strict_paper);

} // namespace detail

/// How the per-sample constraint estimate is produced.
enum class GapEstimator {
    Trajectory, // grouped rollout batches, the Algorithm-2 default
    OneStep,    // one-step agent value on initial states (optimistic variant)
    None,       // unconstrained cross-entropy
};

struct IterationStats {
    int iteration = 0;
    double best_reward_estimate = 0.0; // max R-hat over all n samples
    double elite_best_reward = 0.0;    // max R-hat within the elite set
    double elite_min_gap = 0.0;
    int feasible_count = 0; // i'
    double eta_norm = 0.0;
};

/// One update of the constrained cross-entropy loop: sample n parameter
/// vectors, estimate (R-hat, eps-hat) from independent rollout batches,
/// select the elite set (constraint first, reward second), refit moments.
SearchDistribution cce_iteration(const SearchDistribution& dist, const Environment& env,
                                 const PolicyFamily& family, const CceConfig& cfg,
                                 GapEstimator estimator, Rng& rng,
                                 IterationStats* stats = nullptr);

struct CceResult {
    std::vector<double> theta;      // draw from the final distribution
    std::vector<double> theta_mean; // deterministic alternative (first moments)
    SearchDistribution distribution;
    std::vector<IterationStats> trace;
};

/// Constrained cross-entropy training (the demographic-parity trajectory
/// constraint; equality of opportunity via cfg.eo_qualified_only).
CceResult train(const Environment& env, const PolicyFamily& family, const CceConfig& cfg,
                Rng& rng);

/// Optimistic baseline: the constraint is evaluated on one-step agent values
/// at fresh initial states (no dynamics); the reward estimate still uses
/// full rollouts. Requires Environment::expected_agent_reward.
CceResult train_optimistic(const Environment& env, const PolicyFamily& family,
                           const CceConfig& cfg, Rng& rng);

/// Conservative baseline: unconstrained search over state-independent
/// policies (valid when agent rewards are state-independent, which makes
/// every such policy exactly fair). Tabular environments are checked;
/// continuous environments assert it by contract.
CceResult train_conservative(const Environment& env, const CceConfig& cfg, Rng& rng);

/// Race-blind baseline: unconstrained search; the caller supplies a family
/// whose feature map omits the sensitive attribute.
CceResult train_race_blind(const Environment& env, const PolicyFamily& family,
                           const CceConfig& cfg, Rng& rng);

} // namespace fairmdp

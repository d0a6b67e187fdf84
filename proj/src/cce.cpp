#include "fairmdp/cce.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace fairmdp {

SearchDistribution SearchDistribution::standard(int dim) {
    SearchDistribution d;
    d.first.assign(std::size_t(dim), 0.0);
    d.second.assign(std::size_t(dim), 1.0);
    return d;
}

void SearchDistribution::enforce_floor() {
    for (std::size_t i = 0; i < first.size(); ++i) {
        const double lo = first[i] * first[i] + kVarianceFloor;
        if (second[i] < lo) second[i] = lo;
    }
}

GaussianParams moment_to_params(const SearchDistribution& eta) {
    if (eta.first.size() != eta.second.size())
        throw ValidationError("moment vector: inconsistent dimensions");
    GaussianParams g;
    g.mean = eta.first;
    g.variance.resize(eta.first.size());
    for (std::size_t i = 0; i < eta.first.size(); ++i)
        g.variance[i] = std::max(eta.second[i] - eta.first[i] * eta.first[i], kVarianceFloor);
    return g;
}

std::vector<double> sample_parameters(const SearchDistribution& eta, Rng& rng) {
    const GaussianParams g = moment_to_params(eta);
    std::vector<double> theta(g.mean.size());
    for (std::size_t i = 0; i < theta.size(); ++i)
        theta[i] = rng.normal(g.mean[i], std::sqrt(g.variance[i]));
    return theta;
}

void CceConfig::validate() const {
    if (iterations < 0) throw ValidationError("cce: iterations must be >= 0");
    if (n_samples < 1) throw ValidationError("cce: n must be >= 1");
    if (n_elite < 1 || n_elite > n_samples) throw ValidationError("cce: need 1 <= n' <= n");
    if (rollouts < 1) throw ValidationError("cce: m must be >= 1");
    if (!(smoothing > 0.0 && smoothing < 1.0))
        throw ValidationError("cce: smoothing must lie in (0,1)");
    if (!(sigma > 0.0 && sigma <= 0.5))
        throw ValidationError("cce: sigma must lie in (0, 1/2]");
    if (epsilon < 0.0) throw ValidationError("cce: epsilon must be >= 0");
    if (!(discount > 0.0 && discount <= 1.0))
        throw ValidationError("cce: discount must lie in (0, 1]");
}

PlanResult plan_samples(double r_max, double discount, double epsilon, double sigma,
                        double delta) {
    if (!(r_max > 0.0)) throw ValidationError("plan_samples: R_max must be positive");
    if (!(discount > 0.0 && discount < 1.0))
        throw ValidationError("plan_samples: discount must lie in (0,1)");
    if (!(epsilon > 0.0)) throw ValidationError("plan_samples: epsilon must be positive");
    if (!(sigma > 0.0 && sigma <= 0.5))
        throw ValidationError("plan_samples: sigma must lie in (0, 1/2]");
    if (!(delta > 0.0 && delta < 1.0))
        throw ValidationError("plan_samples: delta must lie in (0,1)");

    PlanResult plan;
    const double m = 32.0 * r_max * (1.0 - discount) * std::log(6.0 / delta) /
                     (sigma * sigma * epsilon * epsilon);
    plan.rollouts = (long long)std::ceil(m);
    const double t = std::log(4.0 * r_max / (sigma * sigma * epsilon * (1.0 - discount))) /
                     std::log(1.0 / discount);
    plan.horizon = std::max(1, int(std::ceil(t)));
    return plan;
}

namespace detail {

namespace {

// eps-hat ascending, ties by R-hat descending, then sample index.
bool by_gap(const SampleScore& a, const SampleScore& b) {
    if (a.gap != b.gap) return a.gap < b.gap;
    if (a.reward != b.reward) return a.reward > b.reward;
    return a.index < b.index;
}

// R-hat descending, ties by eps-hat ascending, then sample index.
bool by_reward(const SampleScore& a, const SampleScore& b) {
    if (a.reward != b.reward) return a.reward > b.reward;
    if (a.gap != b.gap) return a.gap < b.gap;
    return a.index < b.index;
}

} // namespace

std::vector<SampleScore> select_elite(std::vector<SampleScore> scores, int n_elite,
                                      double sigma, double epsilon, bool unconstrained,
                                      int* feasible_count) {
    const int n = int(scores.size());
    if (n_elite < 1 || n_elite > n) throw ValidationError("select_elite: need 1 <= n' <= n");
    std::sort(scores.begin(), scores.end(), by_gap);
    const double cutoff = (1.0 - sigma) * epsilon;
    int feasible = 0;
    if (unconstrained) {
        feasible = n;
    } else {
        while (feasible < n && scores[std::size_t(feasible)].gap <= cutoff) ++feasible;
    }
    if (n_elite <= feasible)
        std::sort(scores.begin(), scores.begin() + feasible, by_reward);
    if (feasible_count) *feasible_count = feasible;
    scores.resize(std::size_t(n_elite));
    return scores;
}

std::vector<double> elite_weights(const std::vector<SampleScore>& elite, bool objective_phase,
                                  bool strict_paper) {
    const std::size_t k = elite.size();
    std::vector<double> w(k, 1.0);
    if (strict_paper) {
        for (std::size_t i = 0; i < k; ++i) w[i] = elite[i].reward;
        double total = 0.0;
        for (double v : w) total += v;
        if (std::abs(total) < 1e-12) w.assign(k, 1.0); // degenerate: fall back
        return w;
    }
    double lo = elite[0].reward, hi = elite[0].reward;
    double glo = elite[0].gap, ghi = elite[0].gap;
    for (const auto& e : elite) {
        lo = std::min(lo, e.reward);
        hi = std::max(hi, e.reward);
        glo = std::min(glo, e.gap);
        ghi = std::max(ghi, e.gap);
    }
    if (objective_phase) {
        if (hi - lo <= 0.0) return w; // all equal: uniform
        for (std::size_t i = 0; i < k; ++i)
            w[i] = elite[i].reward - lo + 1e-3 * (hi - lo);
    } else {
        // Constraint phase: prioritize smaller estimated gaps.
        if (ghi - glo <= 0.0) return w;
        for (std::size_t i = 0; i < k; ++i)
            w[i] = (ghi - elite[i].gap) + 1e-3 * (ghi - glo);
    }
    return w;
}

} // namespace detail

namespace {

using detail::SampleScore;

double estimate_one_step_gap(const Environment& env, const PolicyFamily& family,
                             const std::vector<double>& theta, const CceConfig& cfg,
                             int n_states, Rng& rng) {
    // E_{s ~ D_z}[ sum_a pi(s,a) rho(s,a) ] per group, no dynamics involved.
    std::vector<double> probs;
    double value[2] = {0.0, 0.0};
    for (Group z : {Group::Maj, Group::Min}) {
        double acc = 0.0;
        for (int i = 0; i < n_states; ++i) {
            const EnvState s = env.reset_conditioned(z, cfg.eo_qualified_only, rng);
            family.action_probs(theta, s, probs);
            double one_step = 0.0;
            for (int a = 0; a < int(probs.size()); ++a)
                one_step += probs[std::size_t(a)] * env.expected_agent_reward(s, a);
            acc += one_step;
        }
        value[z == Group::Maj ? 0 : 1] = acc / double(n_states);
    }
    return std::abs(value[0] - value[1]);
}

SampleScore score_sample(const Environment& env, const PolicyFamily& family,
                         const std::vector<double>& theta, const CceConfig& cfg,
                         GapEstimator estimator, int horizon, Rng& sample_rng) {
    const BoundPolicy policy(family, theta);
    const EvalMode mode =
        cfg.discount < 1.0 ? EvalMode::discounted() : EvalMode::finite(horizon);

    SampleScore score;
    Rng reward_rng = sample_rng.derive(1);
    double acc = 0.0;
    for (int j = 0; j < cfg.rollouts; ++j) {
        const Rollout z = sample_rollout(env, policy, horizon, reward_rng);
        acc += rollout_reward_sum(z, cfg.discount);
    }
    score.reward = acc / double(cfg.rollouts);

    switch (estimator) {
    case GapEstimator::None:
        score.gap = 0.0;
        break;
    case GapEstimator::OneStep: {
        Rng gap_rng = sample_rng.derive(2);
        score.gap = estimate_one_step_gap(env, family, theta, cfg, cfg.rollouts, gap_rng);
        break;
    }
    case GapEstimator::Trajectory: {
        // Independent batches per group, initial states conditioned on the
        // group (and the qualified flag for equality of opportunity).
        Rng maj_rng = sample_rng.derive(2);
        Rng min_rng = sample_rng.derive(3);
        std::vector<Rollout> maj_batch, min_batch;
        maj_batch.reserve(std::size_t(cfg.rollouts));
        min_batch.reserve(std::size_t(cfg.rollouts));
        for (int j = 0; j < cfg.rollouts; ++j) {
            maj_batch.push_back(sample_rollout_from(
                env, policy, env.reset_conditioned(Group::Maj, cfg.eo_qualified_only, maj_rng),
                horizon, maj_rng));
            min_batch.push_back(sample_rollout_from(
                env, policy, env.reset_conditioned(Group::Min, cfg.eo_qualified_only, min_rng),
                horizon, min_rng));
        }
        // The reward batch above plays the R-hat role; group values come
        // from their own batches, so the three are independent.
        auto group_value = [&](const std::vector<Rollout>& batch) {
            double total = 0.0;
            for (const auto& z : batch) {
                const double scale = mode.kind == EvalMode::Discounted
                                         ? (1.0 - cfg.discount)
                                         : 1.0 / double(z.steps.size());
                total += scale * rollout_agent_sum(z, cfg.discount);
            }
            return total / double(batch.size());
        };
        score.gap = std::abs(group_value(maj_batch) - group_value(min_batch));
        break;
    }
    }
    return score;
}

} // namespace

SearchDistribution cce_iteration(const SearchDistribution& dist, const Environment& env,
                                 const PolicyFamily& family, const CceConfig& cfg,
                                 GapEstimator estimator, Rng& rng, IterationStats* stats) {
    cfg.validate();
    const int horizon = cfg.horizon > 0 ? cfg.horizon : env.horizon();
    const bool unconstrained =
        estimator == GapEstimator::None || std::isinf(cfg.epsilon);
    const GapEstimator effective = unconstrained ? GapEstimator::None : estimator;

    const int n = cfg.n_samples;
    const std::size_t count = std::size_t(n);
    std::vector<std::vector<double>> thetas(count);
    std::vector<SampleScore> scores(count);
    // Each sample owns a derived stream: evaluations are order-independent
    // and safe to run in parallel lanes.
    for (int i = 0; i < n; ++i) {
        Rng sample_rng = rng.derive(std::uint64_t(i) + 17);
        thetas[std::size_t(i)] = sample_parameters(dist, sample_rng);
        scores[std::size_t(i)] =
            score_sample(env, family, thetas[std::size_t(i)], cfg, effective, horizon, sample_rng);
        scores[std::size_t(i)].index = i;
    }

    int feasible = 0;
    std::vector<SampleScore> elite = detail::select_elite(
        scores, cfg.n_elite, cfg.sigma, cfg.epsilon, unconstrained, &feasible);
    const bool objective_phase = cfg.n_elite <= feasible;

    const std::vector<double> w =
        detail::elite_weights(elite, objective_phase, cfg.strict_paper_weights);
    const int d = dist.dim();
    std::vector<double> m1(std::size_t(d), 0.0), m2(std::size_t(d), 0.0);
    double total = 0.0;
    for (std::size_t e = 0; e < elite.size(); ++e) {
        const auto& theta = thetas[std::size_t(elite[e].index)];
        for (int i = 0; i < d; ++i) {
            m1[std::size_t(i)] += w[e] * theta[std::size_t(i)];
            m2[std::size_t(i)] += w[e] * theta[std::size_t(i)] * theta[std::size_t(i)];
        }
        total += w[e];
    }

    SearchDistribution next = dist;
    const double alpha = cfg.smoothing;
    for (int i = 0; i < d; ++i) {
        next.first[std::size_t(i)] =
            alpha * (m1[std::size_t(i)] / total) + (1.0 - alpha) * dist.first[std::size_t(i)];
        next.second[std::size_t(i)] =
            alpha * (m2[std::size_t(i)] / total) + (1.0 - alpha) * dist.second[std::size_t(i)];
    }
    next.enforce_floor();

    if (stats) {
        stats->best_reward_estimate = scores[0].reward;
        for (const auto& s : scores)
            stats->best_reward_estimate = std::max(stats->best_reward_estimate, s.reward);
        stats->elite_best_reward = elite[0].reward;
        for (const auto& e : elite)
            stats->elite_best_reward = std::max(stats->elite_best_reward, e.reward);
        stats->elite_min_gap = elite[0].gap;
        for (const auto& e : elite) stats->elite_min_gap = std::min(stats->elite_min_gap, e.gap);
        stats->feasible_count = feasible;
        double norm2 = 0.0;
        for (int i = 0; i < d; ++i)
            norm2 += next.first[std::size_t(i)] * next.first[std::size_t(i)] +
                     next.second[std::size_t(i)] * next.second[std::size_t(i)];
        stats->eta_norm = std::sqrt(norm2);
    }
    return next;
}

namespace {

CceResult run_training(const Environment& env, const PolicyFamily& family, const CceConfig& cfg,
                       GapEstimator estimator, Rng& rng) {
    cfg.validate();
    SearchDistribution dist = SearchDistribution::standard(family.dim());
    CceResult result;
    result.trace.reserve(std::size_t(cfg.iterations));
    for (int k = 0; k < cfg.iterations; ++k) {
        Rng iter_rng = rng.derive(1000003ULL * std::uint64_t(k + 1));
        IterationStats stats;
        stats.iteration = k;
        dist = cce_iteration(dist, env, family, cfg, estimator, iter_rng, &stats);
        result.trace.push_back(stats);
    }
    Rng draw_rng = rng.derive(999999937ULL);
    result.theta = sample_parameters(dist, draw_rng);
    result.theta_mean = dist.first;
    result.distribution = std::move(dist);
    return result;
}

} // namespace

CceResult train(const Environment& env, const PolicyFamily& family, const CceConfig& cfg,
                Rng& rng) {
    return run_training(env, family, cfg, GapEstimator::Trajectory, rng);
}

CceResult train_optimistic(const Environment& env, const PolicyFamily& family,
                           const CceConfig& cfg, Rng& rng) {
    return run_training(env, family, cfg, GapEstimator::OneStep, rng);
}

CceResult train_conservative(const Environment& env, const CceConfig& cfg, Rng& rng) {
    if (const auto* tab = dynamic_cast<const TabularEnv*>(&env)) {
        if (!state_independent_agent_rewards(tab->mdp()))
            throw ValidationError(
                "train_conservative: agent rewards are state-dependent; the "
                "state-independent reduction does not apply (use the conservative LP)");
    }
    // Theorem 2: every state-independent policy is exactly fair when agent
    // rewards are state-independent, so the loop is unconstrained CE.
    const StateIndependentFamily family(env.n_actions());
    return run_training(env, family, cfg, GapEstimator::None, rng);
}

CceResult train_race_blind(const Environment& env, const PolicyFamily& family,
                           const CceConfig& cfg, Rng& rng) {
    return run_training(env, family, cfg, GapEstimator::None, rng);
}

} // namespace fairmdp

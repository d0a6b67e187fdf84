#include "fairmdp/etc.hpp"

#include <cmath>

namespace fairmdp {

double TransitionEstimate::max_deviation(const std::vector<Eigen::MatrixXd>& reference) const {
    double dev = 0.0;
    for (std::size_t a = 0; a < p_hat.size(); ++a)
        dev = std::max(dev, (p_hat[a] - reference[a]).cwiseAbs().maxCoeff());
    return dev;
}

TransitionEstimate estimate_transitions(const std::vector<Eigen::MatrixXd>& counts) {
    if (counts.empty()) throw ValidationError("estimate_transitions: no actions");
    const int n = int(counts[0].rows());
    TransitionEstimate est;
    est.counts = counts;
    est.visits = Eigen::MatrixXd::Zero(n, int(counts.size()));
    est.p_hat.assign(counts.size(), Eigen::MatrixXd::Zero(n, n));
    for (int a = 0; a < int(counts.size()); ++a) {
        for (int s = 0; s < n; ++s) {
            const double total = counts[std::size_t(a)].row(s).sum();
            est.visits(s, a) = total;
            if (total > 0.0) {
                est.p_hat[std::size_t(a)].row(s) = counts[std::size_t(a)].row(s) / total;
            } else {
                est.p_hat[std::size_t(a)].row(s).setConstant(1.0 / n);
                est.unvisited.emplace_back(s, a);
            }
        }
    }
    return est;
}

void count_transitions(const std::vector<Rollout>& rollouts,
                       std::vector<Eigen::MatrixXd>& counts) {
    for (const auto& rollout : rollouts) {
        for (std::size_t t = 0; t < rollout.steps.size(); ++t) {
            const auto& step = rollout.steps[t];
            const int next = t + 1 < rollout.steps.size()
                                 ? rollout.steps[t + 1].state_index
                                 : rollout.final_state;
            if (step.state_index < 0 || next < 0)
                throw ValidationError("count_transitions: non-tabular rollout");
            counts[std::size_t(step.action)](step.state_index, next) += 1.0;
        }
    }
}

double EtcConfig::theorem_explore_episodes(int horizon, int n_states, int n_actions,
                                           double r_max, double delta, double lambda0,
                                           double epsilon) {
    if (lambda0 <= 0.0) throw ValidationError("exploration floor must be positive");
    const double t = double(horizon), s = double(n_states);
    return 128.0 * t * t * s * s * r_max * r_max *
           std::log(2.0 * s * s * double(n_actions) / delta) /
           (lambda0 * lambda0 * epsilon * epsilon);
}

namespace {

// Exact finite-horizon occupancy floor of the exploration policy.
void verify_exploration_floor(const TabularMdp& mdp, const StochasticPolicy& pi0, int horizon,
                              double lambda0) {
    if (lambda0 <= 0.0) return;
    const Eigen::VectorXd d =
        state_distribution(mdp, pi0, mdp.initial, EvalMode::finite(horizon));
    const Eigen::MatrixXd lambda = d.asDiagonal() * pi0.pi;
    if (lambda.minCoeff() < lambda0) {
        int s = 0, a = 0;
        lambda.minCoeff(&s, &a);
        throw ValidationError("exploration policy violates the occupancy floor at (s=" +
                              std::to_string(s) + ", a=" + std::to_string(a) +
                              "): " + std::to_string(lambda.minCoeff()) + " < lambda0");
    }
}

// Simulate one episode under a (possibly nonstationary) policy; returns the
// realized total reward and appends transition counts.
double run_episode(const TabularEnv& env, const TimeDependentPolicy& policy, int horizon,
                   Rng& rng, std::vector<Eigen::MatrixXd>* counts) {
    EnvState state = env.reset(rng);
    double total = 0.0;
    std::vector<double> probs;
    for (int t = 0; t < horizon; ++t) {
        const auto& pi = policy.by_time[std::size_t(std::min(t, policy.horizon() - 1))];
        probs.assign(std::size_t(env.n_actions()), 0.0);
        for (int a = 0; a < env.n_actions(); ++a) probs[std::size_t(a)] = pi.pi(state.index, a);
        const int action = rng.categorical(probs);
        auto step = env.step(state, action, rng);
        if (counts) (*counts)[std::size_t(action)](state.index, step.next.index) += 1.0;
        total += step.reward;
        state = step.next;
    }
    return total;
}

} // namespace

EtcResult explore_then_commit(const TabularEnv& env, const EtcConfig& cfg,
                              const FairnessSpec& spec,
                              const std::vector<Eigen::MatrixXd>& inject_p_hat) {
    const TabularMdp& mdp = env.mdp();
    if (cfg.horizon < 1) throw ValidationError("etc: horizon must be >= 1");
    if (cfg.explore_episodes > cfg.total_episodes)
        throw ValidationError("etc: N0 must not exceed N");
    cfg.explore_policy.validate(mdp.n_states, mdp.n_actions);
    verify_exploration_floor(mdp, cfg.explore_policy, cfg.horizon, cfg.exploration_floor);

    // Comparator: optimal eps/4-fair policy on the true model.
    FairnessSpec strict = spec;
    strict.epsilon = cfg.epsilon / 4.0;
    const FairSolveResult comparator = solve_fair_finite(mdp, strict, cfg.horizon);
    if (comparator.status != FairSolveResult::Status::Fair)
        throw ValidationError("etc: the eps/4-fair comparator problem is infeasible");

    EtcResult result;
    result.comparator_reward = comparator.reward;
    result.episode_rewards.reserve(std::size_t(cfg.total_episodes));
    result.cumulative_regret.reserve(std::size_t(cfg.total_episodes));

    Rng rng(cfg.seed);
    std::vector<Eigen::MatrixXd> counts(std::size_t(mdp.n_actions),
                                        Eigen::MatrixXd::Zero(mdp.n_states, mdp.n_states));
    const TimeDependentPolicy explore_tp =
        TimeDependentPolicy::stationary(cfg.explore_policy, cfg.horizon);
    const double explore_value =
        evaluate_finite(mdp, explore_tp, spec).reward;

    double regret = 0.0;
    for (long long n = 0; n < cfg.explore_episodes; ++n) {
        Rng episode_rng = rng.derive(std::uint64_t(n) + 101);
        result.episode_rewards.push_back(
            run_episode(env, explore_tp, cfg.horizon, episode_rng, &counts));
        regret += result.comparator_reward - explore_value;
        result.cumulative_regret.push_back(regret);
    }

    result.estimate = estimate_transitions(counts);

    // Estimated model: known D, R, rho; transitions replaced by P-hat.
    TabularMdp estimated = mdp;
    estimated.transitions = inject_p_hat.empty() ? result.estimate.p_hat : inject_p_hat;
    FairnessSpec commit_spec = spec;
    commit_spec.epsilon = cfg.epsilon / 2.0;
    FairSolveResult solved = solve_fair_finite(estimated, commit_spec, cfg.horizon);
    if (solved.status == FairSolveResult::Status::Fair) {
        result.committed = solved.time_policy;
    } else {
        result.fallback = true; // guaranteed feasible under the theorem's premises
        result.committed = explore_tp;
    }

    const EvalReport committed_report = evaluate_finite(mdp, result.committed, spec);
    result.committed_reward = committed_report.reward;
    result.committed_gap = committed_report.gap;

    for (long long n = cfg.explore_episodes; n < cfg.total_episodes; ++n) {
        Rng episode_rng = rng.derive(std::uint64_t(n) + 101);
        result.episode_rewards.push_back(
            run_episode(env, result.committed, cfg.horizon, episode_rng, nullptr));
        regret += result.comparator_reward - result.committed_reward;
        result.cumulative_regret.push_back(regret);
    }
    return result;
}

std::vector<RegretPoint> regret_curve(const TabularEnv& env, const StochasticPolicy& pi0,
                                      const std::vector<long long>& episode_grid,
                                      int horizon, double explore_scale, int repeats,
                                      std::uint64_t seed) {
    std::vector<RegretPoint> curve;
    Rng master(seed);
    for (std::size_t k = 0; k < episode_grid.size(); ++k) {
        const long long n = episode_grid[k];
        RegretPoint point;
        point.episodes = n;
        point.epsilon = std::pow(double(n), -2.0 / 3.0);
        double total = 0.0;
        for (int rep = 0; rep < repeats; ++rep) {
            EtcConfig cfg;
            cfg.total_episodes = n;
            cfg.explore_episodes = std::min<long long>(
                n, (long long)std::ceil(explore_scale * std::pow(double(n), 2.0 / 3.0)));
            cfg.explore_policy = pi0;
            cfg.horizon = horizon;
            cfg.epsilon = point.epsilon;
            cfg.seed = master.derive(k * 1000 + std::uint64_t(rep)).next_u64();
            const FairnessSpec spec = FairnessSpec::demographic_parity(env.mdp(), point.epsilon);
            const EtcResult run = explore_then_commit(env, cfg, spec);
            total += run.cumulative_regret.back();
        }
        point.regret = total / double(repeats);
        curve.push_back(point);
    }
    return curve;
}

double fit_loglog_slope(const std::vector<RegretPoint>& curve) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int count = 0;
    for (const auto& point : curve) {
        if (point.regret <= 0.0) continue; // zero regret: drop from the fit
        const double x = std::log(double(point.episodes));
        const double y = std::log(point.regret);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++count;
    }
    if (count < 2) return 0.0;
    return (count * sxy - sx * sy) / (count * sxx - sx * sx);
}

Eigen::VectorXd stationary_distribution(const Eigen::MatrixXd& p_pi, double tol) {
    const int n = int(p_pi.rows());
    if (p_pi.cols() != n) throw ValidationError("stationary_distribution: square matrix required");
    // Repeated squaring propagates every basis start at once; rows of P^(2^k)
    // are the time-2^k distributions from each start.
    Eigen::MatrixXd power = p_pi;
    constexpr int kMaxSquarings = 128;
    for (int k = 0; k < kMaxSquarings; ++k) {
        const Eigen::VectorXd spread =
            power.colwise().maxCoeff() - power.colwise().minCoeff();
        if (spread.maxCoeff() <= tol) {
            Eigen::VectorXd d = power.colwise().mean().transpose();
            d /= d.sum();
            const double residual = ((p_pi.transpose() * d) - d).cwiseAbs().maxCoeff();
            if (residual > std::max(tol, 1e-12))
                throw NumericalError("stationary_distribution: fixed-point residual " +
                                     std::to_string(residual) + " exceeds tolerance");
            return d;
        }
        power = power * power;
        // Repair row sums against drift.
        for (int s = 0; s < n; ++s) power.row(s) /= power.row(s).sum();
    }
    throw NumericalError(
        "stationary_distribution: no convergence from all starts; chain is not ergodic");
}

int mixing_time(const Eigen::MatrixXd& p_pi, double eps0) {
    if (eps0 <= 0.0) throw ValidationError("mixing_time: eps0 must be positive");
    const Eigen::VectorXd d = stationary_distribution(p_pi, std::min(eps0 * 1e-3, 1e-12));
    Eigen::MatrixXd power = p_pi; // row s = distribution after t steps from e_s
    constexpr int kCap = 1000000;
    for (int t = 1; t <= kCap; ++t) {
        double worst = 0.0;
        for (int s = 0; s < p_pi.rows(); ++s)
            worst = std::max(worst,
                             (power.row(s).transpose() - d).cwiseAbs().maxCoeff());
        if (worst <= eps0) return t;
        power = power * p_pi;
    }
    throw NumericalError("mixing_time: iteration cap exceeded");
}

UnknownInitResult unknown_init_workflow(const TabularMdp& mdp, const StochasticPolicy& pi0,
                                        double epsilon, const FairnessSpec& spec) {
    mdp.validate();
    if (!(mdp.discount < 1.0))
        throw ValidationError("unknown_init_workflow: requires discount < 1");
    if (separability_violation(mdp))
        throw ValidationError("unknown_init_workflow: the downstream fair solve "
                              "requires a separable MDP");

    UnknownInitResult result;
    const double r_max = mdp.reward_bound(true);
    result.eps0 = (1.0 - mdp.discount) * epsilon / (8.0 * mdp.n_states * r_max);

    // A separable chain decomposes into one closed class per group, so the
    // whole-chain stationary distribution does not exist. The group is
    // immutable and its initial mass p_z is observable, so the chain mixes
    // per half: T0 is the slower half's mixing time and the mixed-state
    // distribution is the p_z-weighted blend of the half stationaries.
    const Eigen::MatrixXd p_pi = induced_transition(mdp, pi0);
    Eigen::VectorXd d_stat = Eigen::VectorXd::Zero(mdp.n_states);
    result.mixing_steps = 0;
    for (Group z : {Group::Maj, Group::Min}) {
        std::vector<int> members;
        double pz = 0.0;
        for (int s = 0; s < mdp.n_states; ++s)
            if (mdp.group_of[std::size_t(s)] == z) {
                members.push_back(s);
                pz += mdp.initial(s);
            }
        if (members.empty() || pz <= 0.0)
            throw EmptyGroupError(std::string("group ") + group_name(z) +
                                  " has zero initial probability");
        const int k = int(members.size());
        Eigen::MatrixXd half(k, k);
        for (int i = 0; i < k; ++i)
            for (int j = 0; j < k; ++j) half(i, j) = p_pi(members[std::size_t(i)],
                                                          members[std::size_t(j)]);
        result.mixing_steps = std::max(result.mixing_steps, mixing_time(half, result.eps0));
        const Eigen::VectorXd half_stat = stationary_distribution(half, 1e-13);
        for (int i = 0; i < k; ++i) d_stat(members[std::size_t(i)]) = pz * half_stat(i);
    }

    TabularMdp mixed = mdp;
    mixed.initial = d_stat;
    FairnessSpec relaxed = spec;
    relaxed.epsilon = epsilon / 2.0;
    result.solve = solve_fair(mixed, relaxed);
    if (result.solve.status == FairSolveResult::Status::Fair) {
        result.policy = result.solve.policy;
    } else {
        result.fallback = true;
        result.policy = pi0;
    }
    return result;
}

} // namespace fairmdp

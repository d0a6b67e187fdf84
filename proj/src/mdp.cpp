#include "fairmdp/mdp.hpp"

#include <cmath>
#include <sstream>

namespace fairmdp {

namespace {

constexpr double kStochasticTol = 1e-12;

void check_distribution(const Eigen::VectorXd& v, const std::string& name) {
    for (int i = 0; i < v.size(); ++i) {
        if (!(v(i) >= 0.0 && v(i) <= 1.0 + kStochasticTol)) {
            std::ostringstream os;
            os << name << "[" << i << "] = " << v(i) << " is not a probability";
            throw ValidationError(os.str());
        }
    }
    if (std::abs(v.sum() - 1.0) > kStochasticTol) {
        std::ostringstream os;
        os << name << " sums to " << v.sum() << ", expected 1 within 1e-12";
        throw ValidationError(os.str());
    }
}

} // namespace

void TabularMdp::validate() const {
    if (n_states <= 0) throw ValidationError("n_states must be positive");
    if (n_actions <= 0) throw ValidationError("n_actions must be positive");
    if (initial.size() != n_states) throw ValidationError("initial: wrong length");
    check_distribution(initial, "initial");
    if (int(transitions.size()) != n_actions)
        throw ValidationError("transitions: expected one matrix per action");
    for (int a = 0; a < n_actions; ++a) {
        const auto& m = transitions[a];
        if (m.rows() != n_states || m.cols() != n_states) {
            std::ostringstream os;
            os << "transitions[" << a << "]: wrong shape";
            throw ValidationError(os.str());
        }
        for (int s = 0; s < n_states; ++s) {
            std::ostringstream os;
            os << "transitions[" << s << "][" << a << "]";
            check_distribution(m.row(s).transpose(), os.str());
        }
    }
    if (reward.rows() != n_states || reward.cols() != n_actions)
        throw ValidationError("reward: wrong shape");
    if (agent_reward.rows() != n_states || agent_reward.cols() != n_actions)
        throw ValidationError("agent_reward: wrong shape");
    if (!(discount >= 0.0 && discount <= 1.0))
        throw ValidationError("discount must lie in [0, 1]");
    if (int(group_of.size()) != n_states)
        throw ValidationError("group_of: wrong length");
}

double TabularMdp::reward_bound(bool with_agent) const {
    double r = reward.cwiseAbs().maxCoeff();
    if (with_agent) r = std::max(r, agent_reward.cwiseAbs().maxCoeff());
    return r;
}

StochasticPolicy StochasticPolicy::uniform(int n_states, int n_actions) {
    StochasticPolicy p;
    p.pi = Eigen::MatrixXd::Constant(n_states, n_actions, 1.0 / n_actions);
    return p;
}

StochasticPolicy StochasticPolicy::deterministic(const std::vector<int>& actions,
                                                 int n_actions) {
    StochasticPolicy p;
    p.pi = Eigen::MatrixXd::Zero(int(actions.size()), n_actions);
    for (std::size_t s = 0; s < actions.size(); ++s) p.pi(int(s), actions[s]) = 1.0;
    return p;
}

void StochasticPolicy::validate(int n_states, int n_actions) const {
    if (pi.rows() != n_states || pi.cols() != n_actions)
        throw ValidationError("policy: wrong shape");
    for (int s = 0; s < n_states; ++s) {
        for (int a = 0; a < n_actions; ++a)
            if (pi(s, a) < -kStochasticTol) {
                std::ostringstream os;
                os << "policy[" << s << "][" << a << "] negative";
                throw ValidationError(os.str());
            }
        if (std::abs(pi.row(s).sum() - 1.0) > kStochasticTol) {
            std::ostringstream os;
            os << "policy[" << s << "] sums to " << pi.row(s).sum();
            throw ValidationError(os.str());
        }
    }
}

FairnessSpec FairnessSpec::demographic_parity(const TabularMdp& mdp, double epsilon) {
    FairnessSpec spec;
    spec.epsilon = epsilon;
    for (int s = 0; s < mdp.n_states; ++s) {
        if (mdp.group_of[s] == Group::Maj)
            spec.maj_states.push_back(s);
        else
            spec.min_states.push_back(s);
    }
    return spec;
}

Eigen::MatrixXd induced_transition(const TabularMdp& mdp, const StochasticPolicy& policy) {
    policy.validate(mdp.n_states, mdp.n_actions);
    Eigen::MatrixXd p_pi = Eigen::MatrixXd::Zero(mdp.n_states, mdp.n_states);
    for (int a = 0; a < mdp.n_actions; ++a)
        p_pi += policy.pi.col(a).asDiagonal() * mdp.transitions[a];
    return p_pi;
}

Eigen::VectorXd propagate(const Eigen::MatrixXd& p_pi, const Eigen::VectorXd& d) {
    return p_pi.transpose() * d;
}

Eigen::VectorXd state_distribution(const TabularMdp& mdp, const StochasticPolicy& policy,
                                   const Eigen::VectorXd& start, EvalMode mode) {
    const Eigen::MatrixXd p_pi = induced_transition(mdp, policy);
    if (mode.kind == EvalMode::Discounted) {
        const double g = mdp.discount;
        if (!(g < 1.0))
            throw ValidationError("discounted evaluation requires discount < 1");
        // (I - gamma P^(pi))^T d = (1 - gamma) D, solved directly.
        const int n = mdp.n_states;
        Eigen::MatrixXd lhs =
            Eigen::MatrixXd::Identity(n, n) - g * p_pi.transpose();
        return lhs.partialPivLu().solve((1.0 - g) * start);
    }
    if (mode.horizon < 1)
        throw ValidationError("finite-horizon evaluation requires horizon >= 1");
    Eigen::VectorXd dt = start;
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(mdp.n_states);
    for (int t = 0; t < mode.horizon; ++t) {
        acc += dt;
        if (t + 1 < mode.horizon) dt = propagate(p_pi, dt);
    }
    return acc / double(mode.horizon);
}

namespace {

// D restricted to the group subset and renormalized; p_z = sum of D there.
std::pair<Eigen::VectorXd, double> restrict_initial(const TabularMdp& mdp,
                                                    const FairnessSpec& spec, Group z) {
    if (z == Group::Maj && spec.maj_initial) {
        return {*spec.maj_initial, spec.maj_initial->sum()};
    }
    if (z == Group::Min && spec.min_initial) {
        return {*spec.min_initial, spec.min_initial->sum()};
    }
    Eigen::VectorXd dz = Eigen::VectorXd::Zero(mdp.n_states);
    double pz = 0.0;
    for (int s : spec.states_of(z)) {
        dz(s) = mdp.initial(s);
        pz += mdp.initial(s);
    }
    if (pz <= 0.0)
        throw EmptyGroupError(std::string("group ") + group_name(z) +
                              " has zero initial probability");
    dz /= pz;
    return {dz, pz};
}

Eigen::MatrixXd occupancy_from(const TabularMdp& mdp, const StochasticPolicy& policy,
                               const Eigen::VectorXd& start, EvalMode mode) {
    const Eigen::VectorXd d = state_distribution(mdp, policy, start, mode);
    return d.asDiagonal() * policy.pi;
}

} // namespace

OccupancyMeasure discounted_occupancy(const TabularMdp& mdp, const StochasticPolicy& policy,
                                      const FairnessSpec& spec, EvalMode mode) {
    OccupancyMeasure occ;
    occ.d = state_distribution(mdp, policy, mdp.initial, mode);
    occ.lambda = occ.d.asDiagonal() * policy.pi;

    if (spec.conditioning == Conditioning::InitialState) {
        auto [d_maj, p_maj] = restrict_initial(mdp, spec, Group::Maj);
        auto [d_min, p_min] = restrict_initial(mdp, spec, Group::Min);
        occ.p_maj = p_maj;
        occ.p_min = p_min;
        occ.lambda_maj = occupancy_from(mdp, policy, d_maj, mode);
        occ.lambda_min = occupancy_from(mdp, policy, d_min, mode);
    } else {
        // Condition on the current state's group: restrict Lambda and
        // renormalize. Equivalent to the above for separable MDPs.
        for (Group z : {Group::Maj, Group::Min}) {
            Eigen::MatrixXd lam = Eigen::MatrixXd::Zero(mdp.n_states, mdp.n_actions);
            double mass = 0.0;
            for (int s : spec.states_of(z)) {
                lam.row(s) = occ.lambda.row(s);
                mass += occ.d(s);
            }
            if (mass <= 0.0)
                throw EmptyGroupError(std::string("group ") + group_name(z) +
                                      " has zero occupancy mass");
            lam /= mass;
            (z == Group::Maj ? occ.lambda_maj : occ.lambda_min) = lam;
            (z == Group::Maj ? occ.p_maj : occ.p_min) = mass;
        }
    }
    return occ;
}

EvalReport evaluate(const TabularMdp& mdp, const StochasticPolicy& policy,
                    const FairnessSpec& spec, EvalMode mode) {
    const OccupancyMeasure occ = discounted_occupancy(mdp, policy, spec, mode);
    EvalReport report;
    const double scale = mode.kind == EvalMode::Discounted
                             ? 1.0 / (1.0 - mdp.discount)
                             : double(mode.horizon);
    report.reward = scale * occ.lambda.cwiseProduct(mdp.reward).sum();
    const double v_maj = occ.lambda_maj.cwiseProduct(mdp.agent_reward).sum();
    const double v_min = occ.lambda_min.cwiseProduct(mdp.agent_reward).sum();
    report.group_agent_rewards[Group::Maj] = v_maj;
    report.group_agent_rewards[Group::Min] = v_min;
    report.gap = std::abs(v_maj - v_min);
    report.within_tolerance = report.gap <= spec.epsilon;
    return report;
}

TimeDependentPolicy TimeDependentPolicy::stationary(const StochasticPolicy& policy,
                                                    int horizon) {
    TimeDependentPolicy tp;
    tp.by_time.assign(std::size_t(horizon), policy);
    return tp;
}

EvalReport evaluate_finite(const TabularMdp& mdp, const TimeDependentPolicy& policy,
                           const FairnessSpec& spec) {
    const int horizon = policy.horizon();
    if (horizon < 1) throw ValidationError("time-dependent policy is empty");

    auto run = [&](const Eigen::VectorXd& start) {
        // Returns (total decision-maker reward, horizon-averaged agent value).
        Eigen::VectorXd dt = start;
        double reward = 0.0, agent = 0.0;
        for (int t = 0; t < horizon; ++t) {
            const auto& pi = policy.by_time[std::size_t(t)].pi;
            reward += dt.dot((pi.cwiseProduct(mdp.reward)).rowwise().sum());
            agent += dt.dot((pi.cwiseProduct(mdp.agent_reward)).rowwise().sum());
            if (t + 1 < horizon)
                dt = propagate(induced_transition(mdp, policy.by_time[std::size_t(t)]), dt);
        }
        return std::pair<double, double>(reward, agent / double(horizon));
    };

    auto restricted = [&](Group z) {
        if (z == Group::Maj && spec.maj_initial) return *spec.maj_initial;
        if (z == Group::Min && spec.min_initial) return *spec.min_initial;
        Eigen::VectorXd dz = Eigen::VectorXd::Zero(mdp.n_states);
        double pz = 0.0;
        for (int s : spec.states_of(z)) {
            dz(s) = mdp.initial(s);
            pz += mdp.initial(s);
        }
        if (pz <= 0.0)
            throw EmptyGroupError(std::string("group ") + group_name(z) +
                                  " has zero initial probability");
        return Eigen::VectorXd(dz / pz);
    };

    EvalReport report;
    report.reward = run(mdp.initial).first;
    const double v_maj = run(restricted(Group::Maj)).second;
    const double v_min = run(restricted(Group::Min)).second;
    report.group_agent_rewards[Group::Maj] = v_maj;
    report.group_agent_rewards[Group::Min] = v_min;
    report.gap = std::abs(v_maj - v_min);
    report.within_tolerance = report.gap <= spec.epsilon;
    return report;
}

std::optional<SeparabilityViolation> separability_violation(const TabularMdp& mdp) {
    for (int s = 0; s < mdp.n_states; ++s)
        for (int a = 0; a < mdp.n_actions; ++a)
            for (int s2 = 0; s2 < mdp.n_states; ++s2)
                if (mdp.group_of[s] != mdp.group_of[s2] && mdp.p(s, a, s2) > 0.0)
                    return SeparabilityViolation{s, a, s2, mdp.p(s, a, s2)};
    return std::nullopt;
}

bool state_independent_agent_rewards(const TabularMdp& mdp, double tol) {
    for (int a = 0; a < mdp.n_actions; ++a)
        for (int s = 1; s < mdp.n_states; ++s)
            if (std::abs(mdp.agent_reward(s, a) - mdp.agent_reward(0, a)) > tol)
                return false;
    return true;
}

} // namespace fairmdp

#include "fairmdp/policy.hpp"

#include <algorithm>
#include <cmath>

namespace fairmdp {

namespace {

double sigmoid(double x) {
    if (x >= 0) {
        const double e = std::exp(-x);
        return 1.0 / (1.0 + e);
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

void softmax(std::vector<double>& scores) {
    const double top = *std::max_element(scores.begin(), scores.end());
    double total = 0.0;
    for (double& s : scores) {
        s = std::exp(s - top);
        total += s;
    }
    for (double& s : scores) s /= total;
}

} // namespace

FeatureMap one_hot_features(int n_states) {
    return [n_states](const EnvState& state, std::vector<double>& out) {
        out.assign(std::size_t(n_states), 0.0);
        if (state.index < 0 || state.index >= n_states)
            throw ValidationError("one_hot_features: state index out of range");
        out[std::size_t(state.index)] = 1.0;
    };
}

LinearSoftmaxFamily::LinearSoftmaxFamily(FeatureMap features, int feature_dim, int n_actions)
    : features_(std::move(features)), feature_dim_(feature_dim), n_actions_(n_actions) {
    if (n_actions_ < 2) throw ValidationError("policy family needs >= 2 actions");
}

int LinearSoftmaxFamily::dim() const {
    return n_actions_ == 2 ? feature_dim_ : feature_dim_ * n_actions_;
}

void LinearSoftmaxFamily::action_probs(const std::vector<double>& theta, const EnvState& state,
                                       std::vector<double>& out) const {
    if (int(theta.size()) != dim()) throw ValidationError("theta: wrong dimension");
    thread_local std::vector<double> phi;
    features_(state, phi);
    if (int(phi.size()) != feature_dim_) throw ValidationError("feature map: wrong dimension");

    if (n_actions_ == 2) {
        double score = 0.0;
        for (int i = 0; i < feature_dim_; ++i) score += theta[std::size_t(i)] * phi[std::size_t(i)];
        const double p1 = sigmoid(score);
        out.assign(2, 0.0);
        out[0] = 1.0 - p1;
        out[1] = p1;
        return;
    }
    out.assign(std::size_t(n_actions_), 0.0);
    for (int a = 0; a < n_actions_; ++a) {
        double score = 0.0;
        for (int i = 0; i < feature_dim_; ++i)
            score += theta[std::size_t(a * feature_dim_ + i)] * phi[std::size_t(i)];
        out[std::size_t(a)] = score;
    }
    softmax(out);
}

void StateIndependentFamily::action_probs(const std::vector<double>& theta,
                                          const EnvState& /*state*/,
                                          std::vector<double>& out) const {
    if (int(theta.size()) != dim()) throw ValidationError("theta: wrong dimension");
    out.assign(std::size_t(n_actions_), 0.0);
    for (int a = 1; a < n_actions_; ++a) out[std::size_t(a)] = theta[std::size_t(a - 1)];
    softmax(out);
}

StochasticPolicy tabulate_policy(const PolicyFamily& family, const std::vector<double>& theta,
                                 const TabularEnv& env) {
    const auto& mdp = env.mdp();
    StochasticPolicy policy;
    policy.pi = Eigen::MatrixXd::Zero(mdp.n_states, mdp.n_actions);
    std::vector<double> probs;
    for (int s = 0; s < mdp.n_states; ++s) {
        EnvState state;
        state.index = s;
        state.group = mdp.group_of[std::size_t(s)];
        family.action_probs(theta, state, probs);
        for (int a = 0; a < mdp.n_actions; ++a) policy.pi(s, a) = probs[std::size_t(a)];
    }
    return policy;
}

} // namespace fairmdp

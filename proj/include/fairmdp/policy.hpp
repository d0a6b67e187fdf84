#pragma once

#include <functional>
#include <vector>

#include "fairmdp/env.hpp"

namespace fairmdp {

/// State -> feature vector, shared by all parameterized policy families.
using FeatureMap = std::function<void(const EnvState&, std::vector<double>&)>;

/// One-hot encoding of the tabular state index.
FeatureMap one_hot_features(int n_states);

/// A family of policies indexed by a parameter vector theta in R^d.
class PolicyFamily {
public:
    virtual ~PolicyFamily() = default;
    virtual int dim() const = 0;
    virtual void action_probs(const std::vector<double>& theta, const EnvState& state,
                              std::vector<double>& out) const = 0;
};

/// Binds a parameter vector to a family, yielding a Policy.
class BoundPolicy final : public Policy {
public:
    BoundPolicy(const PolicyFamily& family, std::vector<double> theta)
        : family_(&family), theta_(std::move(theta)) {}
    void action_probs(const EnvState& state, std::vector<double>& out) const override {
        family_->action_probs(theta_, state, out);
    }
    const std::vector<double>& theta() const { return theta_; }

private:
    const PolicyFamily* family_;
    std::vector<double> theta_;
};

/// Softmax over per-action linear scores in the features; two actions reduce
/// to the logistic special case with a single score vector.
class LinearSoftmaxFamily final : public PolicyFamily {
public:
    LinearSoftmaxFamily(FeatureMap features, int feature_dim, int n_actions);

    int dim() const override;
    void action_probs(const std::vector<double>& theta, const EnvState& state,
                      std::vector<double>& out) const override;

private:
    FeatureMap features_;
    int feature_dim_;
    int n_actions_;
};

/// State-independent policies pi(s,a) = pi~(a): |A|-1 free logits against a
/// fixed zero baseline for the first action.
class StateIndependentFamily final : public PolicyFamily {
public:
    explicit StateIndependentFamily(int n_actions) : n_actions_(n_actions) {}

    int dim() const override { return n_actions_ - 1; }
    void action_probs(const std::vector<double>& theta, const EnvState& state,
                      std::vector<double>& out) const override;

private:
    int n_actions_;
};

/// Materialize a parameterized policy as a tabular one by querying every
/// state of the MDP (for exact evaluation of trained policies).
StochasticPolicy tabulate_policy(const PolicyFamily& family, const std::vector<double>& theta,
                                 const TabularEnv& env);

} // namespace fairmdp

#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "fairmdp/rng.hpp"

namespace fairmdp {

/// Causal graph with structural equations. Vertex i computes
/// X_i = f_i(parent values, noise_i); the noise terms isolate all
/// randomness, so interventions are deterministic given a noise vector.
struct CausalGraph {
    using Equation = std::function<double(const std::vector<double>& parents, double noise)>;
    using NoiseSampler = std::function<double(Rng&)>;

    std::vector<std::vector<int>> parents; // per vertex, indices into V
    std::vector<Equation> equations;
    std::vector<NoiseSampler> noise;

    int size() const { return int(parents.size()); }

    /// Cycle check + shape checks; throws ValidationError.
    void validate() const;
    /// Topological order (parents before children).
    std::vector<int> topological_order() const;

    std::vector<double> sample_noise(Rng& rng) const;
};

/// do(X_i = x), optionally with a mediator: X_{i'} takes its value from a
/// separate evaluation under do(X_i = x_counterfactual) on the same noise.
struct InterventionPlan {
    struct Do {
        int vertex;
        double value;
    };
    struct Mediator {
        int vertex;            // i', the mediated attribute
        double counterfactual; // x', the alternative value of the do-vertex
    };
    std::optional<Do> intervene;
    std::optional<Mediator> mediator;

    void validate(const CausalGraph& graph) const;
};

/// Plain evaluation: topological substitution, deterministic given noise.
std::vector<double> evaluate(const CausalGraph& graph, const std::vector<double>& noise);

/// Evaluation under an intervention plan (see InterventionPlan).
std::vector<double> evaluate_with_plan(const CausalGraph& graph, const InterventionPlan& plan,
                                       const std::vector<double>& noise);

/// Maps a full vertex-value assignment onto a tabular state index.
using StateAssembler = std::function<int(const std::vector<double>& values)>;

/// Empirical initial-state distribution pair for path-specific causal
/// fairness, from shared noise draws:
///   maj side: do(Z = maj), med(Y; Z = min)
///   min side: do(Z = min).
/// The construction is asymmetric; the symmetric variant adds the pair with
/// maj and min swapped so callers can impose both orderings.
struct PathSpecificGroups {
    Eigen::VectorXd maj;
    Eigen::VectorXd min;
    std::optional<Eigen::VectorXd> swapped_maj; // do(Z=min), med(Y; Z=maj)
    std::optional<Eigen::VectorXd> swapped_min; // do(Z=maj)
};

PathSpecificGroups path_specific_groups(const CausalGraph& graph, int z_vertex, int y_vertex,
                                        double maj_value, double min_value,
                                        const StateAssembler& assemble, int n_states,
                                        int n_samples, Rng& rng, bool symmetric = false);

/// Table-driven finite-support graph form (JSON): per vertex a finite noise
/// support and a lookup table over (parent values, noise value).
struct FiniteSupport {
    std::vector<double> values;
    std::vector<double> probs;
};

struct TableCausalGraph {
    CausalGraph graph;
    std::vector<FiniteSupport> noise_support;
};

TableCausalGraph parse_causal_graph(const std::string& json_text);

} // namespace fairmdp

#include "fairmdp/causal.hpp"

#include <cmath>
#include <map>

#include <json.hpp>

#include "fairmdp/errors.hpp"

namespace fairmdp {

void CausalGraph::validate() const {
    const int k = size();
    if (int(equations.size()) != k || int(noise.size()) != k)
        throw ValidationError("causal graph: equations/noise size mismatch");
    for (int i = 0; i < k; ++i)
        for (int p : parents[std::size_t(i)])
            if (p < 0 || p >= k)
                throw ValidationError("causal graph: vertex " + std::to_string(i) +
                                      " has out-of-range parent " + std::to_string(p));
    topological_order(); // throws on cycles
}

std::vector<int> CausalGraph::topological_order() const {
    const int k = size();
    std::vector<int> indegree(static_cast<std::size_t>(k), 0);
    std::vector<std::vector<int>> children(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i)
        for (int p : parents[std::size_t(i)]) {
            children[std::size_t(p)].push_back(i);
            ++indegree[std::size_t(i)];
        }
    std::vector<int> order;
    order.reserve(std::size_t(k));
    std::vector<int> ready;
    for (int i = 0; i < k; ++i)
        if (indegree[std::size_t(i)] == 0) ready.push_back(i);
    while (!ready.empty()) {
        const int v = ready.back();
        ready.pop_back();
        order.push_back(v);
        for (int c : children[std::size_t(v)])
            if (--indegree[std::size_t(c)] == 0) ready.push_back(c);
    }
    if (int(order.size()) != k)
        throw ValidationError("causal graph: edges contain a cycle");
    return order;
}

std::vector<double> CausalGraph::sample_noise(Rng& rng) const {
    std::vector<double> eps(static_cast<std::size_t>(size()));
    for (int i = 0; i < size(); ++i) eps[std::size_t(i)] = noise[std::size_t(i)](rng);
    return eps;
}

void InterventionPlan::validate(const CausalGraph& graph) const {
    if (mediator && !intervene)
        throw ValidationError("intervention plan: a mediator requires a do-pair");
    if (intervene && (intervene->vertex < 0 || intervene->vertex >= graph.size()))
        throw ValidationError("intervention plan: unknown do-vertex");
    if (mediator) {
        if (mediator->vertex < 0 || mediator->vertex >= graph.size())
            throw ValidationError("intervention plan: unknown mediator vertex");
        if (mediator->vertex == intervene->vertex)
            throw ValidationError("intervention plan: mediator must differ from the do-vertex");
    }
}

namespace {

std::vector<double> evaluate_do(const CausalGraph& graph, const std::vector<double>& noise,
                                int do_vertex, double do_value) {
    std::vector<double> values(std::size_t(graph.size()), 0.0);
    std::vector<double> parent_values;
    for (int v : graph.topological_order()) {
        if (v == do_vertex) {
            values[std::size_t(v)] = do_value;
            continue;
        }
        parent_values.clear();
        for (int p : graph.parents[std::size_t(v)])
            parent_values.push_back(values[std::size_t(p)]);
        values[std::size_t(v)] =
            graph.equations[std::size_t(v)](parent_values, noise[std::size_t(v)]);
    }
    return values;
}

} // namespace

std::vector<double> evaluate(const CausalGraph& graph, const std::vector<double>& noise) {
    graph.validate();
    if (int(noise.size()) != graph.size())
        throw ValidationError("causal evaluate: noise vector has wrong length");
    return evaluate_do(graph, noise, -1, 0.0);
}

std::vector<double> evaluate_with_plan(const CausalGraph& graph, const InterventionPlan& plan,
                                       const std::vector<double>& noise) {
    graph.validate();
    plan.validate(graph);
    if (int(noise.size()) != graph.size())
        throw ValidationError("causal evaluate: noise vector has wrong length");
    if (!plan.intervene) return evaluate_do(graph, noise, -1, 0.0);
    if (!plan.mediator)
        return evaluate_do(graph, noise, plan.intervene->vertex, plan.intervene->value);

    // Mediated pass: the mediator vertex takes its value from the
    // counterfactual do() run on the same noise vector.
    const std::vector<double> counterfactual =
        evaluate_do(graph, noise, plan.intervene->vertex, plan.mediator->counterfactual);
    const double pinned = counterfactual[std::size_t(plan.mediator->vertex)];

    std::vector<double> values(std::size_t(graph.size()), 0.0);
    std::vector<double> parent_values;
    for (int v : graph.topological_order()) {
        if (v == plan.intervene->vertex) {
            values[std::size_t(v)] = plan.intervene->value;
            continue;
        }
        if (v == plan.mediator->vertex) {
            values[std::size_t(v)] = pinned;
            continue;
        }
        parent_values.clear();
        for (int p : graph.parents[std::size_t(v)])
            parent_values.push_back(values[std::size_t(p)]);
        values[std::size_t(v)] =
            graph.equations[std::size_t(v)](parent_values, noise[std::size_t(v)]);
    }
    return values;
}

PathSpecificGroups path_specific_groups(const CausalGraph& graph, int z_vertex, int y_vertex,
                                        double maj_value, double min_value,
                                        const StateAssembler& assemble, int n_states,
                                        int n_samples, Rng& rng, bool symmetric) {
    graph.validate();
    if (n_samples < 1) throw ValidationError("path_specific_groups: n_samples must be >= 1");

    auto assemble_checked = [&](const std::vector<double>& values, int sample) {
        const int s = assemble(values);
        if (s < 0 || s >= n_states)
            throw ValidationError("path_specific_groups: assembler produced state " +
                                  std::to_string(s) + " out of range at sample " +
                                  std::to_string(sample));
        return s;
    };

    auto plan_mediated = [&](double do_value, double counterfactual) {
        InterventionPlan plan;
        plan.intervene = InterventionPlan::Do{z_vertex, do_value};
        plan.mediator = InterventionPlan::Mediator{y_vertex, counterfactual};
        return plan;
    };
    auto plan_do = [&](double do_value) {
        InterventionPlan plan;
        plan.intervene = InterventionPlan::Do{z_vertex, do_value};
        return plan;
    };

    PathSpecificGroups out;
    out.maj = Eigen::VectorXd::Zero(n_states);
    out.min = Eigen::VectorXd::Zero(n_states);
    if (symmetric) {
        out.swapped_maj = Eigen::VectorXd::Zero(n_states);
        out.swapped_min = Eigen::VectorXd::Zero(n_states);
    }

    for (int i = 0; i < n_samples; ++i) {
        const std::vector<double> noise = graph.sample_noise(rng); // shared per sample
        const auto maj_values =
            evaluate_with_plan(graph, plan_mediated(maj_value, min_value), noise);
        const auto min_values = evaluate_with_plan(graph, plan_do(min_value), noise);
        out.maj(assemble_checked(maj_values, i)) += 1.0;
        out.min(assemble_checked(min_values, i)) += 1.0;
        if (symmetric) {
            const auto smaj =
                evaluate_with_plan(graph, plan_mediated(min_value, maj_value), noise);
            const auto smin = evaluate_with_plan(graph, plan_do(maj_value), noise);
            (*out.swapped_maj)(assemble_checked(smaj, i)) += 1.0;
            (*out.swapped_min)(assemble_checked(smin, i)) += 1.0;
        }
    }
    out.maj /= double(n_samples);
    out.min /= double(n_samples);
    if (symmetric) {
        *out.swapped_maj /= double(n_samples);
        *out.swapped_min /= double(n_samples);
    }
    return out;
}

TableCausalGraph parse_causal_graph(const std::string& json_text) {
    using nlohmann::json;
    json doc = json::parse(json_text, nullptr, /*allow_exceptions=*/false);
    if (doc.is_discarded()) throw ValidationError("causal graph: malformed JSON");
    if (!doc.contains("vertices") || !doc["vertices"].is_array())
        throw ValidationError("causal graph: missing vertices array");

    TableCausalGraph out;
    const auto& verts = doc["vertices"];
    const int k = int(verts.size());
    out.graph.parents.resize(std::size_t(k));
    out.graph.equations.resize(std::size_t(k));
    out.graph.noise.resize(std::size_t(k));
    out.noise_support.resize(std::size_t(k));

    for (int i = 0; i < k; ++i) {
        const auto& v = verts[std::size_t(i)];
        const std::string where = "vertices[" + std::to_string(i) + "]";
        if (v.contains("parents")) {
            for (const auto& p : v["parents"]) {
                if (!p.is_number_integer())
                    throw ValidationError(where + ".parents: expected integers");
                out.graph.parents[std::size_t(i)].push_back(p.get<int>());
            }
        }
        if (!v.contains("noise") || !v["noise"].contains("values") ||
            !v["noise"].contains("probs"))
            throw ValidationError(where + ".noise: expected values and probs arrays");
        FiniteSupport support;
        for (const auto& x : v["noise"]["values"]) support.values.push_back(x.get<double>());
        for (const auto& x : v["noise"]["probs"]) support.probs.push_back(x.get<double>());
        if (support.values.size() != support.probs.size() || support.values.empty())
            throw ValidationError(where + ".noise: values/probs mismatch");
        double total = 0.0;
        for (double p : support.probs) total += p;
        if (std::abs(total - 1.0) > 1e-9)
            throw ValidationError(where + ".noise.probs: must sum to 1");
        out.noise_support[std::size_t(i)] = support;
        out.graph.noise[std::size_t(i)] = [support](Rng& rng) {
            return support.values[std::size_t(rng.categorical(support.probs))];
        };

        // Table rows: [[parent values...], noise value, result].
        if (!v.contains("table") || !v["table"].is_array())
            throw ValidationError(where + ".table: expected an array of rows");
        std::map<std::vector<double>, double> table;
        for (const auto& row : v["table"]) {
            if (!row.is_array() || row.size() != 3)
                throw ValidationError(where + ".table: each row is [parents, noise, value]");
            std::vector<double> key;
            for (const auto& x : row[0]) key.push_back(x.get<double>());
            key.push_back(row[1].get<double>());
            table[key] = row[2].get<double>();
        }
        const std::string vertex_name = where;
        out.graph.equations[std::size_t(i)] =
            [table, vertex_name](const std::vector<double>& parent_values, double eps) {
                std::vector<double> key = parent_values;
                key.push_back(eps);
                auto it = table.find(key);
                if (it == table.end())
                    throw ValidationError(vertex_name + ".table: no entry for the given " +
                                          "parent/noise combination");
                return it->second;
            };
    }
    out.graph.validate();
    return out;
}

} // namespace fairmdp

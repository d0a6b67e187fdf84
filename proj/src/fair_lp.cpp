#include "fairmdp/fair_lp.hpp"

#include <cmath>
#include <sstream>

namespace fairmdp {

namespace {

void require_separable(const TabularMdp& mdp) {
    if (auto v = separability_violation(mdp)) {
        std::ostringstream os;
        os << "MDP is not separable: P(" << v->s << "," << v->a << "," << v->s2
           << ") = " << v->prob << " changes the group component";
        throw ValidationError(os.str());
    }
}

// The parity rows restrict lambda to the spec subsets, which encodes
// initial-group conditioning only when each subset traps its own occupancy
// mass: no transitions across a subset boundary in either direction.
void require_closed_groups(const TabularMdp& mdp, const FairnessSpec& spec) {
    std::vector<int> side(std::size_t(mdp.n_states), -1);
    for (int s : spec.maj_states) side[std::size_t(s)] = 0;
    for (int s : spec.min_states) side[std::size_t(s)] = 1;
    for (int s = 0; s < mdp.n_states; ++s)
        for (int a = 0; a < mdp.n_actions; ++a)
            for (int s2 = 0; s2 < mdp.n_states; ++s2) {
                if (mdp.p(s, a, s2) <= 0.0) continue;
                const int from = side[std::size_t(s)], to = side[std::size_t(s2)];
                if (from != to && (from >= 0 || to >= 0)) {
                    std::ostringstream os;
                    os << "group subsets are not transition-closed: P(" << s << "," << a
                       << "," << s2 << ") = " << mdp.p(s, a, s2)
                       << " crosses a subset boundary";
                    throw ValidationError(os.str());
                }
            }
}

double group_initial_mass(const TabularMdp& mdp, const FairnessSpec& spec, Group z) {
    double pz = 0.0;
    for (int s : spec.states_of(z)) pz += mdp.initial(s);
    if (pz <= 0.0)
        throw EmptyGroupError(std::string("group ") + group_name(z) +
                              " has zero initial probability");
    return pz;
}

// Appends the parity machinery shared by the group-form and per-state-form
// LPs. `rows` holds coefficient vectors over lambda variables only; each row
// must equal c (exactly, or within eps/2 when eps > 0). Returns the finished
// program given the flow block and objective over lambda.
LinearProgram assemble(const Eigen::MatrixXd& flow, const Eigen::VectorXd& flow_rhs,
                       const Eigen::VectorXd& objective_lambda,
                       const std::vector<Eigen::VectorXd>& parity_rows, double eps) {
    const int n_lambda = int(objective_lambda.size());
    const int n_parity = int(parity_rows.size());
    const bool relaxed = eps > 0.0;
    const int n_slack = relaxed ? 2 * n_parity : 0;
    const int c_index = n_lambda;
    const int n_vars = n_lambda + 1 + n_slack;
    const int n_rows = int(flow_rhs.size()) + (relaxed ? 2 * n_parity : n_parity);

    LinearProgram lp;
    lp.objective = Eigen::VectorXd::Zero(n_vars);
    lp.objective.head(n_lambda) = objective_lambda;
    lp.equality = Eigen::MatrixXd::Zero(n_rows, n_vars);
    lp.rhs = Eigen::VectorXd::Zero(n_rows);
    lp.signs.assign(std::size_t(n_vars), VarSign::NonNegative);
    lp.signs[std::size_t(c_index)] = VarSign::Free;

    lp.equality.topLeftCorner(flow.rows(), n_lambda) = flow;
    lp.rhs.head(flow_rhs.size()) = flow_rhs;

    int row = int(flow_rhs.size());
    for (int k = 0; k < n_parity; ++k) {
        if (!relaxed) {
            lp.equality.row(row).head(n_lambda) = parity_rows[std::size_t(k)];
            lp.equality(row, c_index) = -1.0;
            ++row;
        } else {
            // v - c + s1 = eps/2 and c - v + s2 = eps/2 with s1, s2 >= 0.
            lp.equality.row(row).head(n_lambda) = parity_rows[std::size_t(k)];
            lp.equality(row, c_index) = -1.0;
            lp.equality(row, n_lambda + 1 + 2 * k) = 1.0;
            lp.rhs(row) = eps / 2.0;
            ++row;
            lp.equality.row(row).head(n_lambda) = -parity_rows[std::size_t(k)];
            lp.equality(row, c_index) = 1.0;
            lp.equality(row, n_lambda + 1 + 2 * k + 1) = 1.0;
            lp.rhs(row) = eps / 2.0;
            ++row;
        }
    }
    return lp;
}

// Flow block of Algorithm 1: one row per state s',
//   sum_a lambda(s',a) - gamma sum_{s,a} lambda(s,a) P(s,a,s') = (1-g) D(s').
void discounted_flow(const TabularMdp& mdp, Eigen::MatrixXd& flow, Eigen::VectorXd& rhs) {
    const int n = mdp.n_states, na = mdp.n_actions;
    const double g = mdp.discount;
    flow = Eigen::MatrixXd::Zero(n, n * na);
    rhs = (1.0 - g) * mdp.initial;
    for (int s2 = 0; s2 < n; ++s2)
        for (int s = 0; s < n; ++s)
            for (int a = 0; a < na; ++a) {
                double coeff = -g * mdp.p(s, a, s2);
                if (s == s2) coeff += 1.0;
                flow(s2, s * na + a) = coeff;
            }
}

StochasticPolicy extract_policy(const Eigen::MatrixXd& lambda) {
    const int n = int(lambda.rows()), na = int(lambda.cols());
    StochasticPolicy policy;
    policy.pi = Eigen::MatrixXd::Zero(n, na);
    for (int s = 0; s < n; ++s) {
        double total = 0.0;
        for (int a = 0; a < na; ++a) total += std::max(lambda(s, a), 0.0);
        if (total <= 1e-14) {
            policy.pi.row(s).setConstant(1.0 / na); // unreached: any completion works
        } else {
            for (int a = 0; a < na; ++a) policy.pi(s, a) = std::max(lambda(s, a), 0.0) / total;
        }
    }
    return policy;
}

bool one_step_parity_diagnostic(const TabularMdp& mdp, const StochasticPolicy& policy,
                                double tol = 1e-6) {
    double lo = 0.0, hi = 0.0;
    for (int s = 0; s < mdp.n_states; ++s) {
        double w = 0.0;
        for (int a = 0; a < mdp.n_actions; ++a) w += policy.pi(s, a) * mdp.agent_reward(s, a);
        if (s == 0) {
            lo = hi = w;
        } else {
            lo = std::min(lo, w);
            hi = std::max(hi, w);
        }
    }
    return hi - lo <= tol;
}

FairSolveResult finish(const TabularMdp& mdp, const FairnessSpec& spec, const LpSolution& sol,
                       const Eigen::MatrixXd& lambda, double c_star) {
    FairSolveResult result;
    result.status = FairSolveResult::Status::Fair;
    result.lambda = lambda;
    result.common_value = c_star;
    result.lp_objective = sol.objective;
    result.policy = extract_policy(lambda);
    const EvalReport report = evaluate(mdp, result.policy, spec);
    result.reward = report.reward;
    result.gap = report.gap;
    result.policy_level_parity = one_step_parity_diagnostic(mdp, result.policy);
    return result;
}

} // namespace

LinearProgram build_fair_lp(const TabularMdp& mdp, const FairnessSpec& spec) {
    mdp.validate();
    if (!(mdp.discount < 1.0)) throw ValidationError("fair LP requires discount < 1");
    require_separable(mdp);
    require_closed_groups(mdp, spec);

    const int na = mdp.n_actions;
    Eigen::MatrixXd flow;
    Eigen::VectorXd rhs;
    discounted_flow(mdp, flow, rhs);

    Eigen::VectorXd objective(mdp.n_states * na);
    for (int s = 0; s < mdp.n_states; ++s)
        for (int a = 0; a < na; ++a)
            objective(s * na + a) = mdp.reward(s, a) / (1.0 - mdp.discount);

    std::vector<Eigen::VectorXd> parity;
    for (Group z : {Group::Maj, Group::Min}) {
        const double pz = group_initial_mass(mdp, spec, z);
        Eigen::VectorXd row = Eigen::VectorXd::Zero(mdp.n_states * na);
        for (int s : spec.states_of(z))
            for (int a = 0; a < na; ++a) row(s * na + a) = mdp.agent_reward(s, a) / pz;
        parity.push_back(std::move(row));
    }
    return assemble(flow, rhs, objective, parity, spec.epsilon);
}

LinearProgram build_conservative_lp(const TabularMdp& mdp, const FairnessSpec& spec) {
    mdp.validate();
    if (!(mdp.discount < 1.0)) throw ValidationError("fair LP requires discount < 1");
    require_separable(mdp);

    const int na = mdp.n_actions;
    Eigen::MatrixXd flow;
    Eigen::VectorXd rhs;
    discounted_flow(mdp, flow, rhs);

    Eigen::VectorXd objective(mdp.n_states * na);
    for (int s = 0; s < mdp.n_states; ++s)
        for (int a = 0; a < na; ++a)
            objective(s * na + a) = mdp.reward(s, a) / (1.0 - mdp.discount);

    // One row per state, all tied to the same scalar c.
    std::vector<Eigen::VectorXd> parity;
    for (int s = 0; s < mdp.n_states; ++s) {
        Eigen::VectorXd row = Eigen::VectorXd::Zero(mdp.n_states * na);
        for (int a = 0; a < na; ++a) row(s * na + a) = mdp.agent_reward(s, a);
        parity.push_back(std::move(row));
    }
    return assemble(flow, rhs, objective, parity, spec.epsilon);
}

namespace {

FairSolveResult run_solve(const TabularMdp& mdp, const FairnessSpec& spec,
                          const LinearProgram& lp) {
    const LpSolution sol = solve(lp);
    if (sol.status == LpStatus::Infeasible) {
        FairSolveResult result;
        result.status = FairSolveResult::Status::Infeasible;
        return result;
    }
    if (sol.status == LpStatus::Unbounded)
        throw NumericalError("fair LP reported unbounded; occupancy polytope is bounded");

    const int na = mdp.n_actions;
    Eigen::MatrixXd lambda(mdp.n_states, na);
    for (int s = 0; s < mdp.n_states; ++s)
        for (int a = 0; a < na; ++a) lambda(s, a) = sol.x(s * na + a);
    return finish(mdp, spec, sol, lambda, sol.x(mdp.n_states * na));
}

} // namespace

FairSolveResult solve_fair(const TabularMdp& mdp, const FairnessSpec& spec) {
    return run_solve(mdp, spec, build_fair_lp(mdp, spec));
}

FairSolveResult solve_conservative(const TabularMdp& mdp, const FairnessSpec& spec) {
    return run_solve(mdp, spec, build_conservative_lp(mdp, spec));
}

FairSolveResult solve_fair_finite(const TabularMdp& mdp, const FairnessSpec& spec,
                                  int horizon) {
    mdp.validate();
    if (horizon < 1) throw ValidationError("finite-horizon solve requires horizon >= 1");
    require_separable(mdp);
    require_closed_groups(mdp, spec);

    const int n = mdp.n_states, na = mdp.n_actions, T = horizon;
    const int n_lambda = n * na * T;
    auto idx = [&](int s, int t, int a) { return (t * n + s) * na + a; };

    // Layered occupancy: layer 0 carries D/T, later layers carry the pushed-
    // forward mass, so sum lambda = 1 and Lambda(s,a) = sum_t lambda(s,t,a).
    Eigen::MatrixXd flow = Eigen::MatrixXd::Zero(n * T, n_lambda);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n * T);
    for (int s = 0; s < n; ++s) {
        for (int a = 0; a < na; ++a) flow(s, idx(s, 0, a)) = 1.0;
        rhs(s) = mdp.initial(s) / double(T);
    }
    for (int t = 0; t + 1 < T; ++t)
        for (int s2 = 0; s2 < n; ++s2) {
            const int row = (t + 1) * n + s2;
            for (int a = 0; a < na; ++a) flow(row, idx(s2, t + 1, a)) = 1.0;
            for (int s = 0; s < n; ++s)
                for (int a = 0; a < na; ++a)
                    flow(row, idx(s, t, a)) -= mdp.p(s, a, s2);
        }

    Eigen::VectorXd objective(n_lambda);
    for (int t = 0; t < T; ++t)
        for (int s = 0; s < n; ++s)
            for (int a = 0; a < na; ++a)
                objective(idx(s, t, a)) = double(T) * mdp.reward(s, a);

    std::vector<Eigen::VectorXd> parity;
    for (Group z : {Group::Maj, Group::Min}) {
        const double pz = group_initial_mass(mdp, spec, z);
        Eigen::VectorXd row = Eigen::VectorXd::Zero(n_lambda);
        for (int s : spec.states_of(z))
            for (int t = 0; t < T; ++t)
                for (int a = 0; a < na; ++a) row(idx(s, t, a)) = mdp.agent_reward(s, a) / pz;
        parity.push_back(std::move(row));
    }

    const LinearProgram lp = assemble(flow, rhs, objective, parity, spec.epsilon);
    const LpSolution sol = solve(lp);
    if (sol.status == LpStatus::Infeasible) {
        FairSolveResult result;
        result.status = FairSolveResult::Status::Infeasible;
        return result;
    }
    if (sol.status == LpStatus::Unbounded)
        throw NumericalError("finite-horizon fair LP reported unbounded");

    FairSolveResult result;
    result.status = FairSolveResult::Status::Fair;
    result.lp_objective = sol.objective;
    result.common_value = sol.x(n_lambda);
    result.lambda = Eigen::MatrixXd::Zero(n, na);
    result.time_policy.by_time.reserve(std::size_t(T));
    for (int t = 0; t < T; ++t) {
        Eigen::MatrixXd layer(n, na);
        for (int s = 0; s < n; ++s)
            for (int a = 0; a < na; ++a) layer(s, a) = sol.x(idx(s, t, a));
        result.lambda += layer;
        result.time_policy.by_time.push_back(extract_policy(layer));
    }
    result.policy = extract_policy(result.lambda); // stationary projection

    const EvalReport report = evaluate_finite(mdp, result.time_policy, spec);
    result.reward = report.reward;
    result.gap = report.gap;
    result.policy_level_parity = false;
    return result;
}

} // namespace fairmdp

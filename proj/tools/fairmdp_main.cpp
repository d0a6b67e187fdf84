// Command-line harness: file-driven fair solves, loan-MDP training and the
// experiment grid, explore-then-commit runs, and chain mixing diagnostics.
// Every command takes --seed (default from FAIRMDP_SEED) and produces
// byte-identical output given identical inputs.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "fairmdp/cce.hpp"
#include "fairmdp/etc.hpp"
#include "fairmdp/fair_lp.hpp"
#include "fairmdp/json_io.hpp"
#include "fairmdp/loan.hpp"
#include "fairmdp/loan_experiment.hpp"

using namespace fairmdp;

namespace {

std::string fmt(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.9g", x);
    return buf;
}

std::uint64_t default_seed() {
    if (const char* env = std::getenv("FAIRMDP_SEED")) {
        try {
            return std::stoull(env);
        } catch (...) {
            throw ValidationError("FAIRMDP_SEED must be an unsigned integer");
        }
    }
    return 0;
}

void write_text(const std::string& path, const std::string& text) {
    if (path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write file: " + path);
    out << text;
}

// ---------------------------------------------------------------------------
// solve

int cmd_solve(const std::string& mdp_path, bool conservative, double epsilon, int horizon,
              const std::string& csv_path) {
    const TabularMdp mdp = load_tabular_mdp(mdp_path);
    const FairnessSpec spec = FairnessSpec::demographic_parity(mdp, epsilon);
    FairSolveResult result;
    if (horizon > 0)
        result = solve_fair_finite(mdp, spec, horizon);
    else
        result = conservative ? solve_conservative(mdp, spec) : solve_fair(mdp, spec);

    if (result.status == FairSolveResult::Status::Infeasible) {
        std::cout << "status: Infeasible\n";
        return 2;
    }
    std::cout << "status: Fair\n";
    std::cout << "reward: " << fmt(result.reward) << "\n";
    std::cout << "common_value: " << fmt(result.common_value) << "\n";
    std::cout << "gap: " << fmt(result.gap) << "\n";
    if (conservative)
        std::cout << "one_step_parity: " << (result.policy_level_parity ? "yes" : "no") << "\n";
    std::cout << "policy:\n";
    for (int s = 0; s < result.policy.pi.rows(); ++s) {
        std::cout << "  pi(s" << s << ",.) =";
        for (int a = 0; a < result.policy.pi.cols(); ++a)
            std::cout << " " << fmt(result.policy.pi(s, a));
        std::cout << "\n";
    }
    if (!csv_path.empty()) {
        std::ostringstream csv;
        csv << "state,action,policy,lambda\n";
        for (int s = 0; s < result.policy.pi.rows(); ++s)
            for (int a = 0; a < result.policy.pi.cols(); ++a)
                csv << s << "," << a << "," << fmt(result.policy.pi(s, a)) << ","
                    << fmt(result.lambda(s, a)) << "\n";
        write_text(csv_path, csv.str());
    }
    return 0;
}

// ---------------------------------------------------------------------------
int cmd_train(const std::string& params_path, const std::string& method_name,
              std::uint64_t seed, CceConfig cfg, int eval_episodes,
              const std::string& trace_path) {
    const LoanParams params =
        params_path.empty() ? LoanParams{} : load_loan_params(params_path);
    const LoanEnv env(params);
    const LoanMethod method = LoanMethod::parse(method_name);
    if (cfg.epsilon < 0) cfg.epsilon = params.epsilon;

    const LoanRunResult result =
        run_loan_method(env, method, cfg, seed, eval_episodes, /*restarts=*/1);
    std::cout << "method: " << method.name << "\n";
    std::cout << "reward: " << fmt(result.reward_mean) << "\n";
    std::cout << "constraint: " << fmt(result.constraint_value) << "\n";
    std::cout << "theta:";
    for (double v : result.theta) std::cout << " " << fmt(v);
    std::cout << "\n";

    std::ostringstream csv;
    csv << "iteration,best_reward_estimate,elite_min_gap,feasible_count,eta_norm\n";
    for (const auto& row : result.trace)
        csv << row.iteration << "," << fmt(row.best_reward_estimate) << ","
            << fmt(row.elite_min_gap) << "," << row.feasible_count << ","
            << fmt(row.eta_norm) << "\n";
    if (!trace_path.empty()) write_text(trace_path, csv.str());
    return 0;
}

int cmd_loan_experiment(const std::string& params_path, const std::string& methods_arg,
                        std::uint64_t seed, int repeats, CceConfig cfg, int eval_episodes,
                        int jobs, int restarts, const std::string& csv_path) {
    const LoanParams params =
        params_path.empty() ? LoanParams{} : load_loan_params(params_path);
    const LoanEnv env(params);
    if (cfg.epsilon < 0) cfg.epsilon = params.epsilon;

    std::vector<LoanMethod> methods;
    std::stringstream splitter(methods_arg);
    for (std::string token; std::getline(splitter, token, ',');)
        methods.push_back(LoanMethod::parse(token));
    if (methods.empty()) throw ValidationError("no methods given");

    struct Cell {
        std::size_t method_index;
        int repeat;
        LoanRunResult result;
    };
    std::vector<Cell> cells;
    for (std::size_t mi = 0; mi < methods.size(); ++mi)
        for (int rep = 0; rep < repeats; ++rep) cells.push_back({mi, rep, {}});

    const auto started = std::chrono::steady_clock::now();
    // Independent (method, repeat) cells; each owns a derived seed, so the
    // output is identical for any job count.
    std::size_t next_cell = 0;
    std::mutex mutex;
    auto worker = [&]() {
        for (;;) {
            std::size_t mine;
            {
                std::lock_guard<std::mutex> lock(mutex);
                if (next_cell >= cells.size()) return;
                mine = next_cell++;
            }
            Cell& cell = cells[mine];
            const std::uint64_t cell_seed =
                Rng(seed).derive(1000 * cell.method_index + std::uint64_t(cell.repeat) + 1)
                    .next_u64();
            cell.result = run_loan_method(env, methods[cell.method_index], cfg, cell_seed,
                                          eval_episodes, restarts);
        }
    };
    if (jobs <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

    std::ostringstream csv;
    csv << "method,seed,repeats,reward_mean,reward_se,constraint_value,constraint_se,"
           "constraint_measured\n";
    for (std::size_t mi = 0; mi < methods.size(); ++mi) {
        double r_sum = 0, r_sq = 0, c_sum = 0, c_sq = 0, mc_sum = 0;
        for (const auto& cell : cells) {
            if (cell.method_index != mi) continue;
            r_sum += cell.result.reward_mean;
            r_sq += cell.result.reward_mean * cell.result.reward_mean;
            c_sum += cell.result.constraint_value;
            c_sq += cell.result.constraint_value * cell.result.constraint_value;
            mc_sum += cell.result.constraint_measured;
        }
        const double n = double(repeats);
        const double r_mean = r_sum / n, c_mean = c_sum / n;
        const double r_var = repeats > 1 ? (r_sq - n * r_mean * r_mean) / (n - 1) : 0.0;
        const double c_var = repeats > 1 ? (c_sq - n * c_mean * c_mean) / (n - 1) : 0.0;
        csv << methods[mi].name << "," << seed << "," << repeats << "," << fmt(r_mean) << ","
            << fmt(std::sqrt(std::max(r_var, 0.0) / n)) << "," << fmt(c_mean) << ","
            << fmt(std::sqrt(std::max(c_var, 0.0) / n)) << "," << fmt(mc_sum / n) << "\n";
    }
    write_text(csv_path, csv.str());
    std::cerr << "wall_time_s: " << elapsed << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// etc-experiment and mix

int cmd_etc(const std::string& mdp_path, long long episodes, long long explore,
            int horizon, double epsilon, double floor, std::uint64_t seed,
            const std::string& csv_path) {
    const TabularMdp mdp = load_tabular_mdp(mdp_path);
    TabularEnv env(mdp, horizon);
    const FairnessSpec spec = FairnessSpec::demographic_parity(mdp, epsilon);

    EtcConfig cfg;
    cfg.total_episodes = episodes;
    cfg.explore_episodes = explore;
    cfg.explore_policy = StochasticPolicy::uniform(mdp.n_states, mdp.n_actions);
    cfg.horizon = horizon;
    cfg.epsilon = epsilon;
    cfg.exploration_floor = floor;
    cfg.seed = seed;

    const EtcResult result = explore_then_commit(env, cfg, spec);
    std::ostringstream csv;
    csv << "episode,reward,cumulative_regret\n";
    for (std::size_t n = 0; n < result.episode_rewards.size(); ++n)
        csv << (n + 1) << "," << fmt(result.episode_rewards[n]) << ","
            << fmt(result.cumulative_regret[n]) << "\n";
    write_text(csv_path, csv.str());
    std::cerr << "comparator_reward: " << fmt(result.comparator_reward) << "\n";
    std::cerr << "committed_reward: " << fmt(result.committed_reward) << "\n";
    std::cerr << "committed_gap: " << fmt(result.committed_gap) << "\n";
    std::cerr << "fallback: " << (result.fallback ? "yes" : "no") << "\n";
    return 0;
}

int cmd_mix(const std::string& mdp_path, double eps0) {
    const TabularMdp mdp = load_tabular_mdp(mdp_path);
    const StochasticPolicy policy = StochasticPolicy::uniform(mdp.n_states, mdp.n_actions);
    const Eigen::MatrixXd p_pi = induced_transition(mdp, policy);
    const Eigen::VectorXd d = stationary_distribution(p_pi, std::min(1e-12, eps0 * 1e-3));
    const int t0 = mixing_time(p_pi, eps0);
    std::cout << "mixing_time: " << t0 << "\n";
    std::cout << "stationary:";
    for (int s = 0; s < d.size(); ++s) std::cout << " " << fmt(d(s));
    std::cout << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Fair-policy optimization for MDPs with feedback dynamics"};
    app.require_subcommand(1);

    std::uint64_t seed = 0;
    bool seed_given = false;

    // solve
    auto* solve_cmd = app.add_subcommand("solve", "Fair occupancy-measure LP on an MDP file");
    std::string solve_mdp, solve_csv;
    bool solve_conservative_flag = false;
    double solve_eps = 0.0;
    int solve_horizon = 0;
    solve_cmd->add_option("--mdp", solve_mdp, "MDP JSON file")->required();
    solve_cmd->add_flag("--conservative", solve_conservative_flag,
                        "per-state one-step parity rows instead of group rows");
    solve_cmd->add_option("--eps", solve_eps, "fairness tolerance (default 0: exact parity)");
    solve_cmd->add_option("--finite-horizon", solve_horizon,
                          "episodic undiscounted solve over this horizon");
    solve_cmd->add_option("--csv", solve_csv, "write the policy/occupancy table here");

    // train
    auto* train_cmd = app.add_subcommand("train", "Cross-entropy training on the loan MDP");
    std::string train_params, train_method = "dp", train_trace;
    CceConfig train_cfg;
    train_cfg.iterations = 100;
    train_cfg.n_samples = 100;
    train_cfg.n_elite = 10;
    train_cfg.rollouts = 200;
    train_cfg.epsilon = -1.0; // resolved from the params file
    int train_eval = 2000;
    train_cmd->add_option("--params", train_params, "loan parameter JSON file");
    train_cmd->add_option("--method", train_method, "rb|dp|eo|opt-dp|opt-eo|cons");
    train_cmd->add_option("--iters", train_cfg.iterations, "CCE iterations");
    train_cmd->add_option("--samples", train_cfg.n_samples, "parameter samples per iteration");
    train_cmd->add_option("--elite", train_cfg.n_elite, "elite size");
    train_cmd->add_option("--rollouts", train_cfg.rollouts, "rollouts per estimate");
    train_cmd->add_option("--alpha", train_cfg.smoothing, "smoothing");
    train_cmd->add_option("--sigma", train_cfg.sigma, "tolerance fraction");
    train_cmd->add_option("--eps", train_cfg.epsilon, "fairness tolerance");
    train_cmd->add_option("--eval-episodes", train_eval, "fresh evaluation episodes");
    train_cmd->add_option("--trace", train_trace, "write the training trace CSV here");

    // loan-experiment
    auto* loan_cmd =
        app.add_subcommand("loan-experiment", "Method grid on the loan MDP, CSV report");
    std::string loan_params, loan_methods = "rb,dp,opt-dp,cons", loan_csv;
    CceConfig loan_cfg;
    loan_cfg.iterations = 100;
    loan_cfg.n_samples = 100;
    loan_cfg.n_elite = 10;
    loan_cfg.rollouts = 200;
    loan_cfg.epsilon = -1.0;
    int loan_repeats = 5, loan_eval = 10000, loan_jobs = 1, loan_restarts = 5;
    loan_cmd->add_option("--params", loan_params, "loan parameter JSON file");
    loan_cmd->add_option("--methods", loan_methods, "comma-separated method list");
    loan_cmd->add_option("--repeats", loan_repeats, "independent repetitions per method");
    loan_cmd->add_option("--restarts", loan_restarts,
                         "training restarts per cell, selected by training estimates");
    loan_cmd->add_option("--iters", loan_cfg.iterations, "CCE iterations");
    loan_cmd->add_option("--samples", loan_cfg.n_samples, "parameter samples per iteration");
    loan_cmd->add_option("--elite", loan_cfg.n_elite, "elite size");
    loan_cmd->add_option("--rollouts", loan_cfg.rollouts, "rollouts per estimate");
    loan_cmd->add_option("--alpha", loan_cfg.smoothing, "smoothing");
    loan_cmd->add_option("--sigma", loan_cfg.sigma, "tolerance fraction");
    loan_cmd->add_option("--eps", loan_cfg.epsilon, "fairness tolerance");
    loan_cmd->add_option("--eval-episodes", loan_eval, "fresh evaluation episodes");
    loan_cmd->add_option("--jobs", loan_jobs, "parallel (method, repeat) cells");
    loan_cmd->add_option("--csv", loan_csv, "write the report CSV here (default stdout)");

    // etc-experiment
    auto* etc_cmd = app.add_subcommand("etc-experiment",
                                       "Explore-then-commit on a tabular MDP file");
    std::string etc_mdp, etc_csv;
    long long etc_episodes = 1000, etc_explore = 200;
    int etc_horizon = 8;
    double etc_eps = 0.2, etc_floor = 0.0;
    etc_cmd->add_option("--mdp", etc_mdp, "MDP JSON file")->required();
    etc_cmd->add_option("--episodes", etc_episodes, "total episodes N");
    etc_cmd->add_option("--explore", etc_explore, "exploration episodes N0");
    etc_cmd->add_option("--horizon", etc_horizon, "episode length T");
    etc_cmd->add_option("--eps", etc_eps, "fairness tolerance");
    etc_cmd->add_option("--floor", etc_floor, "exploration-floor lambda0 to verify");
    etc_cmd->add_option("--csv", etc_csv, "write the regret trace CSV here");

    // mix
    auto* mix_cmd = app.add_subcommand("mix", "Stationary distribution and mixing time");
    std::string mix_mdp;
    double mix_eps0 = 0.01;
    mix_cmd->add_option("--mdp", mix_mdp, "MDP JSON file")->required();
    mix_cmd->add_option("--eps0", mix_eps0, "mixing tolerance");

    for (auto* cmd : {solve_cmd, train_cmd, loan_cmd, etc_cmd, mix_cmd})
        cmd->add_option("--seed", seed, "master seed (default: FAIRMDP_SEED or 0)")
            ->each([&](const std::string&) { seed_given = true; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e); // --help
        app.exit(e);
        return 1;
    }

    try {
        if (!seed_given) seed = default_seed();
        if (solve_cmd->parsed())
            return cmd_solve(solve_mdp, solve_conservative_flag, solve_eps, solve_horizon,
                             solve_csv);
        if (train_cmd->parsed())
            return cmd_train(train_params, train_method, seed, train_cfg, train_eval,
                             train_trace);
        if (loan_cmd->parsed())
            return cmd_loan_experiment(loan_params, loan_methods, seed, loan_repeats, loan_cfg,
                                       loan_eval, loan_jobs, loan_restarts, loan_csv);
        if (etc_cmd->parsed())
            return cmd_etc(etc_mdp, etc_episodes, etc_explore, etc_horizon, etc_eps, etc_floor,
                           seed, etc_csv);
        if (mix_cmd->parsed()) return cmd_mix(mix_mdp, mix_eps0);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}

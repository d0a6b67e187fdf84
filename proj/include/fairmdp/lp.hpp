#pragma once

#include <Eigen/Dense>
#include <vector>

#include "fairmdp/errors.hpp"

namespace fairmdp {

enum class VarSign { NonNegative, Free };

/// Linear program in equality standard form, maximization sense:
///   max c.x  subject to  A x = b,  x_j >= 0 for NonNegative variables.
struct LinearProgram {
    Eigen::VectorXd objective; // c
    Eigen::MatrixXd equality;  // A, one row per constraint
    Eigen::VectorXd rhs;       // b
    std::vector<VarSign> signs;

    int n_vars() const { return int(objective.size()); }
    int n_constraints() const { return int(rhs.size()); }
    void validate() const;
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpSolution {
    LpStatus status = LpStatus::Infeasible;
    Eigen::VectorXd x;
    double objective = 0.0;
};

// Centralized tolerances.
namespace lptol {
inline constexpr double feasibility = 1e-7;       // |A x - b| at an Optimal point
inline constexpr double pivot_floor = 1e-11;      // smallest usable pivot
inline constexpr double reduced_cost_zero = 1e-9; // optimality threshold
inline constexpr double phase1_feasible = 1e-9;   // phase-1 objective cutoff
} // namespace lptol

/// Two-phase primal simplex on a dense tableau. Free variables are split
/// into differences of nonnegative pairs. Bland's rule takes over whenever
/// a degenerate pivot occurs, until the objective strictly improves.
/// Infeasible/Unbounded are statuses; pivot collapse throws NumericalError.
LpSolution solve(const LinearProgram& lp);

} // namespace fairmdp

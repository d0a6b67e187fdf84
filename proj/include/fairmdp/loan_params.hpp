#pragma once

#include "fairmdp/errors.hpp"

namespace fairmdp {

/// Parameters of the loan-applicant belief MDP. Defaults are the published
/// experiment values; the discount and the qualification threshold p0 are
/// not pinned by the experiment tables and stay configurable (discount 1.0
/// selects undiscounted horizon-T evaluation).
struct LoanParams {
    double interest = 0.17318629;   // I
    double p_minority = 0.29294318; // p_Z
    double alpha_maj = 0.65338681;
    double beta_maj = 0.20783559;
    double alpha_min = 0.48824268;
    double beta_min = 0.48346869;
    double risk_weight = 0.01;      // lambda
    double denial_penalty = 0.1;    // tau
    double epsilon = 0.1;
    int horizon = 50;               // T (decision steps per episode)
    int forced_maj = 10;            // T_maj forced-exploration offers
    int forced_min = 7;             // T_min
    double discount = 1.0;
    double qualify_threshold = 0.7; // p0 for equality of opportunity

    void validate() const {
        if (alpha_maj <= 0 || beta_maj <= 0 || alpha_min <= 0 || beta_min <= 0)
            throw ValidationError("loan params: Beta parameters must be positive");
        if (denial_penalty < 0) throw ValidationError("loan params: tau must be >= 0");
        if (!(p_minority >= 0 && p_minority <= 1))
            throw ValidationError("loan params: p_Z must lie in [0,1]");
        if (horizon < 1) throw ValidationError("loan params: T must be >= 1");
        if (forced_maj >= horizon || forced_min >= horizon)
            throw ValidationError("loan params: T_z must be < T");
        if (forced_maj < 0 || forced_min < 0)
            throw ValidationError("loan params: T_z must be >= 0");
        if (!(discount > 0 && discount <= 1))
            throw ValidationError("loan params: discount must lie in (0,1]");
        if (!(qualify_threshold >= 0 && qualify_threshold <= 1))
            throw ValidationError("loan params: p0 must lie in [0,1]");
        if (epsilon < 0) throw ValidationError("loan params: epsilon must be >= 0");
    }

    /// Per-step bank-reward magnitude bound, the R_max fed to the planner.
    double reward_bound() const;
};

} // namespace fairmdp

#pragma once

#include <string>

#include "fairmdp/loan_params.hpp"
#include "fairmdp/mdp.hpp"

namespace fairmdp {

/// Parse a tabular MDP from its JSON document form. Validation errors name
/// the offending field and index.
TabularMdp load_tabular_mdp(const std::string& path);
TabularMdp parse_tabular_mdp(const std::string& json_text);

/// Loan-environment parameters; fields mirror the published parameter names.
LoanParams load_loan_params(const std::string& path);
LoanParams parse_loan_params(const std::string& json_text);

} // namespace fairmdp

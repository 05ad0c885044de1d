#pragma once

#include <span>
#include <string>

#include "fomc_absa/regression.hpp"

namespace fomc_absa {

// JSON array, one object per result with keys indicator, aspect, lead, n,
// alpha, beta, se_beta, t_beta, p_beta, r_squared (in that order). A
// non-finite t_beta is written as null.
std::string regression_report_json(std::span<const RegressionResult> results);

// Fixed-width summary table, one row per (indicator, aspect); header only
// when there are no results.
std::string regression_report_text(std::span<const RegressionResult> results);

// Scatter plot of the aligned pairs with the fitted line.
std::string regression_scatter_svg(std::span<const AlignedPair> pairs, const RegressionResult& result);

}  // namespace fomc_absa

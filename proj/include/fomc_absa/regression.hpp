#pragma once

// Macroeconomic indicator ingestion, monthly alignment against a sentiment
// index, and simple OLS with significance statistics.

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fomc_absa/date.hpp"

namespace fomc_absa {

struct Observation {
  Date date;
  double value = 0.0;
};

struct MacroSeries {
  std::string indicator;
  std::vector<Observation> observations;  // strictly increasing dates
};

// CSV with header `date,value`. Rows are sorted on load; duplicate dates,
// unparseable rows and non-finite values are fatal (with line numbers).
MacroSeries parse_macro_csv(std::string_view content, std::string indicator);
MacroSeries load_macro_csv(const std::filesystem::path& path, std::string indicator = "");

// One observation per calendar month: the mean of its values, dated on the 1st.
MacroSeries aggregate_monthly(const MacroSeries& series);

struct AlignedPair {
  Month month;  // month of the sentiment observation
  double x = 0.0;
  double y = 0.0;
};

// Pairs sentiment month m with the macro value of month m + lead. Throws
// InputError("insufficient overlap") for fewer than 3 pairs.
std::vector<AlignedPair> align(std::span<const std::pair<Month, double>> sentiment, const MacroSeries& monthly_macro,
                               int lead);

struct RegressionResult {
  std::string indicator;
  std::string aspect;
  int lead = 0;
  std::size_t n = 0;
  double alpha = 0.0, beta = 0.0;
  double se_alpha = 0.0, se_beta = 0.0;
  double t_beta = 0.0, p_beta = 1.0;
  double r_squared = 0.0;
  // Constant response: r_squared is reported as 0.
  bool degenerate_response = false;
};

// y = alpha + beta x. Throws NumericError for n < 3 or a constant regressor.
// With an exact fit (zero residuals) and beta != 0, t_beta is infinite and
// p_beta is 0; with a constant response t_beta = 0 and p_beta = 1.
RegressionResult ols_fit(std::span<const double> x, std::span<const double> y);
RegressionResult ols_fit(std::span<const AlignedPair> pairs);

}  // namespace fomc_absa

#include "fomc_absa/regression.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <map>

#include "fomc_absa/error.hpp"
#include "fomc_absa/stats.hpp"
#include "fomc_absa/text.hpp"

namespace fomc_absa {

MacroSeries parse_macro_csv(std::string_view content, std::string indicator) {
  MacroSeries series{std::move(indicator), {}};
  std::size_t start = 0, line_no = 0;
  while (start < content.size()) {
    auto end = content.find('\n', start);
    if (end == std::string_view::npos) end = content.size();
    auto line = content.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line_no == 1) {
      if (collapse_whitespace(line) != "date,value") {
        throw InputError("macro CSV line 1: expected header 'date,value'");
      }
      continue;
    }
    if (collapse_whitespace(line).empty()) continue;
    auto comma = line.find(',');
    auto fail = [&](const std::string& why) {
      throw InputError("macro CSV line " + std::to_string(line_no) + ": " + why);
    };
    if (comma == std::string_view::npos) fail("expected two fields");
    auto date_text = collapse_whitespace(line.substr(0, comma));
    auto value_text = collapse_whitespace(line.substr(comma + 1));
    auto date = parse_iso_date(date_text);
    if (!date) fail("bad date '" + date_text + "'");
    double value = 0.0;
    const char* first = value_text.data();
    const char* last = first + value_text.size();
    if (!value_text.empty() && *first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last || value_text.empty()) fail("bad value '" + value_text + "'");
    if (!std::isfinite(value)) fail("non-finite value");
    series.observations.push_back({*date, value});
  }
  std::stable_sort(series.observations.begin(), series.observations.end(),
                   [](const Observation& a, const Observation& b) { return a.date < b.date; });
  for (std::size_t i = 1; i < series.observations.size(); ++i) {
    if (series.observations[i].date == series.observations[i - 1].date) {
      throw InputError("macro CSV: duplicate date " + format_iso_date(series.observations[i].date));
    }
  }
  return series;
}

MacroSeries load_macro_csv(const std::filesystem::path& path, std::string indicator) {
  if (indicator.empty()) indicator = path.stem().string();
  try {
    return parse_macro_csv(read_file(path), std::move(indicator));
  } catch (const InputError& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

MacroSeries aggregate_monthly(const MacroSeries& series) {
  std::map<Month, std::pair<double, std::size_t>> acc;
  for (const auto& obs : series.observations) {
    auto& [sum, n] = acc[Month::of(obs.date)];
    sum += obs.value;
    ++n;
  }
  MacroSeries out{series.indicator, {}};
  for (const auto& [month, a] : acc) {
    out.observations.push_back({month.first_day(), a.first / static_cast<double>(a.second)});
  }
  return out;
}

std::vector<AlignedPair> align(std::span<const std::pair<Month, double>> sentiment, const MacroSeries& monthly_macro,
                               int lead) {
  if (lead < 0) throw InputError("lead must be non-negative");
  std::map<Month, double> macro;
  for (const auto& obs : monthly_macro.observations) {
    if (!macro.emplace(Month::of(obs.date), obs.value).second) {
      throw InputError("macro series is not monthly: two observations in " + Month::of(obs.date).to_string());
    }
  }
  std::vector<AlignedPair> out;
  for (const auto& [month, x] : sentiment) {
    auto it = macro.find(month.plus(lead));
    if (it != macro.end()) out.push_back({month, x, it->second});
  }
  std::sort(out.begin(), out.end(), [](const AlignedPair& a, const AlignedPair& b) { return a.month < b.month; });
  if (out.size() < 3) {
    throw InputError("insufficient overlap: " + std::to_string(out.size()) + " aligned months, need at least 3");
  }
  return out;
}

RegressionResult ols_fit(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw NumericError("x and y differ in length");
  const std::size_t n = x.size();
  if (n < 3) throw NumericError("OLS needs at least 3 observations");
  const double nd = static_cast<double>(n);

  double x_mean = 0.0, y_mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    x_mean += x[i];
    y_mean += y[i];
  }
  x_mean /= nd;
  y_mean /= nd;

  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - x_mean, dy = y[i] - y_mean;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  const bool constant_x = std::all_of(x.begin(), x.end(), [&](double v) { return v == x[0]; });
  if (constant_x || !(sxx > 0.0)) throw NumericError("degenerate regressor");

  RegressionResult r;
  r.n = n;
  r.beta = sxy / sxx;
  r.alpha = y_mean - r.beta * x_mean;

  double ssr = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = y[i] - r.alpha - r.beta * x[i];
    ssr += e * e;
  }
  if (syy > 0.0) {
    r.r_squared = std::clamp(1.0 - ssr / syy, 0.0, 1.0);
  } else {
    r.degenerate_response = true;
    r.r_squared = 0.0;
  }

  const double s2 = ssr / (nd - 2.0);
  r.se_beta = std::sqrt(s2 / sxx);
  r.se_alpha = std::sqrt(s2 * (1.0 / nd + x_mean * x_mean / sxx));
  const double df = nd - 2.0;
  if (r.se_beta > 0.0) {
    r.t_beta = r.beta / r.se_beta;
    r.p_beta = student_t_two_sided_p(r.t_beta, df);
  } else if (r.beta != 0.0) {
    r.t_beta = std::copysign(std::numeric_limits<double>::infinity(), r.beta);
    r.p_beta = 0.0;
  } else {
    r.t_beta = 0.0;
    r.p_beta = 1.0;
  }
  return r;
}

RegressionResult ols_fit(std::span<const AlignedPair> pairs) {
  std::vector<double> x, y;
  x.reserve(pairs.size());
  y.reserve(pairs.size());
  for (const auto& p : pairs) {
    x.push_back(p.x);
    y.push_back(p.y);
  }
  return ols_fit(x, y);
}

}  // namespace fomc_absa

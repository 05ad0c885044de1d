#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "fomc_absa/error.hpp"
#include "fomc_absa/regression.hpp"
#include "fomc_absa/report.hpp"
#include "fomc_absa/stats.hpp"
#include "oracles.hpp"

using namespace fomc_absa;
using V = std::vector<double>;

namespace {

std::vector<std::pair<Month, double>> monthly(int year, unsigned first, std::vector<double> values) {
  std::vector<std::pair<Month, double>> out;
  Month m{year, first};
  for (double v : values) {
    out.emplace_back(m, v);
    m = m.plus(1);
  }
  return out;
}

MacroSeries macro(std::vector<std::pair<const char*, double>> rows) {
  MacroSeries s{"ind", {}};
  for (auto [d, v] : rows) s.observations.push_back({*parse_iso_date(d), v});
  return s;
}

}  // namespace

TEST_SUITE("regression") {
  TEST_CASE("worked example matches the reference statistics package") {
    V x{1, 2, 3}, y{1, 2, 4};
    auto r = ols_fit(x, y);
    CHECK(r.n == 3);
    CHECK(std::fabs(r.beta - 1.5) <= 1e-12);
    CHECK(std::fabs(r.alpha + 2.0 / 3.0) <= 1e-12);
    CHECK(std::fabs(r.r_squared - 27.0 / 28.0) <= 1e-12);
    CHECK(std::fabs(r.se_beta - 0.28867513459481287) <= 1e-8);
    CHECK(std::fabs(r.se_alpha - 0.62360956446232352) <= 1e-8);
    CHECK(std::fabs(r.t_beta - 5.196152422706632) <= 1e-8);
    CHECK(std::fabs(r.p_beta - 0.12103772) <= 1e-8);
  }

  TEST_CASE("exact fit") {
    auto r = ols_fit(V{1, 2, 3}, V{2, 4, 6});
    CHECK(r.beta == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(std::fabs(r.alpha) <= 1e-14);
    CHECK(r.r_squared == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(r.p_beta <= 1e-12);
    auto exact = ols_fit(V{0, 1, 2}, V{0, 1, 2});
    CHECK(std::isinf(exact.t_beta));
    CHECK(exact.p_beta == 0.0);
  }

  TEST_CASE("constant response") {
    auto r = ols_fit(V{1, 2, 3, 4}, V{5, 5, 5, 5});
    CHECK(r.beta == 0.0);
    CHECK(r.alpha == 5.0);
    CHECK(r.r_squared == 0.0);
    CHECK(r.degenerate_response);
    CHECK(r.t_beta == 0.0);
    CHECK(r.p_beta == 1.0);
  }

  TEST_CASE("degenerate inputs") {
    CHECK_THROWS_WITH_AS(ols_fit(V{2, 2, 2}, V{1, 2, 3}), "degenerate regressor", NumericError);
    CHECK_THROWS_WITH_AS(ols_fit(V{0.1, 0.1, 0.1, 0.1, 0.1}, V{1, 2, 3, 4, 5}), "degenerate regressor", NumericError);
    CHECK_THROWS_AS(ols_fit(V{1, 2}, V{1, 2}), NumericError);
    CHECK_THROWS_AS(ols_fit(V{1, 2, 3}, V{1, 2}), NumericError);
  }

  TEST_CASE("random instances agree with the high-precision normal equations") {
    std::mt19937_64 rng(1234);
    std::normal_distribution<double> n(0.0, 1.0);
    for (int trial = 0; trial < 1000; ++trial) {
      std::size_t size = 3 + rng() % 48;
      V x(size), y(size);
      double b = n(rng) * 3, a = n(rng), scale = std::exp(n(rng)), noise = std::exp(n(rng) - 1);
      for (std::size_t i = 0; i < size; ++i) {
        x[i] = n(rng) * scale;
        y[i] = a + b * x[i] + noise * n(rng);
      }
      auto r = ols_fit(x, y);
      auto o = oracle::normal_equations(x, y);
      CHECK(oracle::rel_close(r.beta, o.beta, 1e-9));
      CHECK(oracle::rel_close(r.alpha, o.alpha, 1e-9));
      CHECK(oracle::rel_close(r.r_squared, o.r_squared, 1e-9));
      CHECK(oracle::rel_close(r.se_beta, o.se_beta, 1e-9));
      CHECK(oracle::rel_close(r.se_alpha, o.se_alpha, 1e-9));
    }
  }

  TEST_CASE("residual orthogonality and R^2 = Pearson^2") {
    std::mt19937_64 rng(77);
    std::normal_distribution<double> n(0.0, 1.0);
    for (int trial = 0; trial < 500; ++trial) {
      std::size_t size = 3 + rng() % 60;
      V x(size), y(size);
      for (std::size_t i = 0; i < size; ++i) {
        x[i] = n(rng) + 2;
        y[i] = 0.3 * x[i] + n(rng);
      }
      auto r = ols_fit(x, y);
      double sum_e = 0, sum_ex = 0, scale_e = 0, scale_ex = 0;
      double mx = 0, my = 0;
      for (std::size_t i = 0; i < size; ++i) {
        double e = y[i] - r.alpha - r.beta * x[i];
        sum_e += e;
        sum_ex += e * x[i];
        scale_e += std::fabs(y[i]);
        scale_ex += std::fabs(y[i] * x[i]);
        mx += x[i];
        my += y[i];
      }
      CHECK(std::fabs(sum_e) <= 1e-9 * scale_e);
      CHECK(std::fabs(sum_ex) <= 1e-9 * scale_ex);
      mx /= static_cast<double>(size);
      my /= static_cast<double>(size);
      double sxy = 0, sxx = 0, syy = 0;
      for (std::size_t i = 0; i < size; ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
      }
      double rho = sxy / std::sqrt(sxx * syy);
      CHECK(r.r_squared >= 0.0);
      CHECK(r.r_squared <= 1.0);
      CHECK(std::fabs(r.r_squared - rho * rho) <= 1e-12);
    }
  }

  TEST_CASE("affine equivariance in the response") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> n(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
      std::size_t size = 4 + rng() % 30;
      V x(size), y(size), y2(size);
      double a = n(rng) * 4;
      if (std::fabs(a) < 0.1) a = 1.7;
      double b = n(rng) * 10;
      for (std::size_t i = 0; i < size; ++i) {
        x[i] = n(rng);
        y[i] = x[i] + n(rng);
        y2[i] = a * y[i] + b;
      }
      auto r = ols_fit(x, y), r2 = ols_fit(x, y2);
      CHECK(r2.beta == doctest::Approx(a * r.beta).epsilon(1e-9).scale(1));
      CHECK(r2.alpha == doctest::Approx(a * r.alpha + b).epsilon(1e-9).scale(1));
      CHECK(r2.r_squared == doctest::Approx(r.r_squared).epsilon(1e-9));
      CHECK(r2.p_beta == doctest::Approx(r.p_beta).epsilon(1e-7).scale(1e-12));
    }
  }

  TEST_CASE("t-table entries") {
    struct Row {
      double df, t, p;
    };
    const Row table[] = {{5, 2.571, 0.05},  {10, 2.228, 0.05}, {30, 2.042, 0.05}, {5, 3.365, 0.02},  {10, 2.764, 0.02},
                         {30, 2.457, 0.02}, {5, 4.032, 0.01},  {10, 3.169, 0.01}, {30, 2.750, 0.01}};
    for (const auto& row : table) {
      CAPTURE(row.df);
      CAPTURE(row.t);
      CHECK(std::fabs(student_t_two_sided_p(row.t, row.df) - row.p) <= 5e-4);
    }
  }

  TEST_CASE("t distribution matches the reference package") {
    // Two-sided p-values computed with the reference scientific stack.
    CHECK(std::fabs(student_t_two_sided_p(2.571, 5) - 0.049974634683851375) <= 1e-12);
    CHECK(std::fabs(student_t_two_sided_p(2.228, 10) - 0.050011771817111327) <= 1e-12);
    CHECK(std::fabs(student_t_two_sided_p(2.750, 30) - 0.009999894526931188) <= 1e-12);
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> ut(-12, 12), udf(0.5, 400);
    for (int i = 0; i < 3000; ++i) {
      double t = ut(rng), df = udf(rng);
      double p = student_t_two_sided_p(t, df), ref = oracle::t_two_sided_p(t, df);
      CHECK(std::fabs(p - ref) <= 1e-12 + 1e-9 * ref);
    }
  }

  TEST_CASE("t cdf: symmetry, monotonicity, limits") {
    for (double df : {1.0, 2.0, 7.5, 30.0, 1000.0}) {
      CHECK(student_t_cdf(0.0, df) == doctest::Approx(0.5).epsilon(1e-15));
      double prev = 0.0;
      for (double t = -30; t <= 30; t += 0.25) {
        double c = student_t_cdf(t, df);
        CHECK(c >= prev);
        CHECK(std::fabs(c + student_t_cdf(-t, df) - 1.0) <= 1e-12);
        prev = c;
      }
    }
    CHECK(student_t_two_sided_p(std::numeric_limits<double>::infinity(), 3) == 0.0);
    CHECK(student_t_two_sided_p(0.0, 3) == 1.0);
    CHECK_THROWS_AS(student_t_two_sided_p(1.0, 0.0), NumericError);
  }

  TEST_CASE("incomplete beta special values") {
    CHECK(incomplete_beta(1, 1, 0.3) == doctest::Approx(0.3).epsilon(1e-14));
    CHECK(incomplete_beta(2, 3, 0.0) == 0.0);
    CHECK(incomplete_beta(2, 3, 1.0) == 1.0);
    // I_x(a, 1) = x^a
    CHECK(incomplete_beta(3.5, 1, 0.6) == doctest::Approx(std::pow(0.6, 3.5)).epsilon(1e-13));
    CHECK_THROWS_AS(incomplete_beta(0, 1, 0.5), NumericError);
    CHECK_THROWS_AS(incomplete_beta(1, 1, 1.5), NumericError);
  }

  TEST_CASE("macro CSV parsing") {
    auto s = parse_macro_csv("date,value\n2019-02-01,1.5\n2019-01-01,-2\n\n", "gdp");
    REQUIRE(s.observations.size() == 2);
    CHECK(format_iso_date(s.observations[0].date) == "2019-01-01");
    CHECK(s.observations[1].value == 1.5);
    CHECK(s.indicator == "gdp");
    CHECK(parse_macro_csv("date,value\r\n2019-01-01,+3e-1\r\n", "x").observations[0].value == 0.3);
    CHECK_THROWS_WITH_AS(parse_macro_csv("date,value\n2019-01-01,1\n2019-01-01,2\n", "x"),
                         doctest::Contains("duplicate date 2019-01-01"), InputError);
    CHECK_THROWS_WITH_AS(parse_macro_csv("date,value\n2019-01-01,1\n2019-01-32,2\n", "x"), doctest::Contains("line 3"),
                         InputError);
    CHECK_THROWS_WITH_AS(parse_macro_csv("date,value\n2019-01-01,abc\n", "x"), doctest::Contains("line 2"), InputError);
    CHECK_THROWS_AS(parse_macro_csv("date,value\n2019-01-01,nan\n", "x"), InputError);
    CHECK_THROWS_AS(parse_macro_csv("day,val\n", "x"), InputError);
    CHECK_THROWS_AS(parse_macro_csv("date,value\n2019-01-01\n", "x"), InputError);
  }

  TEST_CASE("macro CSV file defaults the indicator to the stem") {
    auto s = load_macro_csv(FOMC_ABSA_FIXTURES "/macro/unemployment.csv");
    CHECK(s.indicator == "unemployment");
    CHECK(s.observations.size() == 10);
  }

  TEST_CASE("monthly aggregation") {
    auto m = aggregate_monthly(macro({{"2019-01-01", 3.0}, {"2019-01-15", 3.0}, {"2019-02-03", 1.0}, {"2019-02-20", 2.0}}));
    REQUIRE(m.observations.size() == 2);
    CHECK(m.observations[0].value == 3.0);
    CHECK(m.observations[1].value == 1.5);
    CHECK(format_iso_date(m.observations[1].date) == "2019-02-01");
    auto already = macro({{"2019-01-01", 1.0}, {"2019-02-01", 2.0}, {"2019-03-01", 4.0}});
    auto again = aggregate_monthly(already);
    for (std::size_t i = 0; i < 3; ++i) CHECK(again.observations[i].value == already.observations[i].value);
  }

  TEST_CASE("alignment with and without lead") {
    auto sentiment = monthly(2019, 1, {0.1, 0.2, 0.3, 0.4});
    auto m = aggregate_monthly(macro({{"2019-01-01", 1}, {"2019-02-01", 2}, {"2019-03-01", 3}, {"2019-04-01", 4},
                                      {"2019-05-01", 5}}));
    auto same = align(sentiment, m, 0);
    REQUIRE(same.size() == 4);
    CHECK(same[0].y == 1);
    CHECK(same[3].x == 0.4);
    auto led = align(sentiment, m, 1);
    REQUIRE(led.size() == 4);
    CHECK(led[0].month == Month{2019, 1});
    CHECK(led[0].y == 2);
    CHECK(led[3].y == 5);
    CHECK_THROWS_WITH_AS(align(monthly(2020, 1, {1, 2, 3}), m, 0), doctest::Contains("insufficient overlap"), InputError);
    CHECK(align(sentiment, m, 2).size() == 3);
    CHECK_THROWS_AS(align(sentiment, m, 3), InputError);
    CHECK_THROWS_AS(align(sentiment, m, -1), InputError);
  }

  TEST_CASE("report formats") {
    RegressionResult r;
    r.indicator = "gdp_growth";
    r.aspect = "growth";
    r.n = 3;
    r.alpha = -2.0 / 3.0;
    r.beta = 1.5;
    r.se_beta = 0.5;
    r.t_beta = 3.0;
    r.p_beta = 0.25;
    r.r_squared = 0.75;
    std::vector<RegressionResult> one{r};
    auto json = regression_report_json(one);
    CHECK(json.find("\"indicator\": \"gdp_growth\"") != std::string::npos);
    CHECK(json.find("\"beta\": 1.5") < json.find("\"se_beta\""));
    CHECK(regression_report_json({}) == "[]\n");

    auto text = regression_report_text(one);
    CHECK(std::count(text.begin(), text.end(), '\n') == 3);
    CHECK(text.find("gdp_growth") != std::string::npos);
    auto empty = regression_report_text({});
    CHECK(std::count(empty.begin(), empty.end(), '\n') == 2);
    CHECK(empty.starts_with("indicator"));

    r.t_beta = std::numeric_limits<double>::infinity();
    std::vector<RegressionResult> inf{r};
    CHECK(regression_report_json(inf).find("\"t_beta\": null") != std::string::npos);

    std::vector<AlignedPair> pairs{{Month{2019, 1}, 0, 1}, {Month{2019, 2}, 1, 2}, {Month{2019, 3}, 2, 4}};
    r.indicator = "a<b";
    auto svg = regression_scatter_svg(pairs, r);
    CHECK(svg.starts_with("<svg"));
    CHECK(svg.find("a&lt;b") != std::string::npos);
    std::size_t circles = 0;
    for (auto pos = svg.find("<circle"); pos != std::string::npos; pos = svg.find("<circle", pos + 1)) ++circles;
    CHECK(circles == 3);
  }
}

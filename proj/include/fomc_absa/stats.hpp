#pragma once

namespace fomc_absa {

// Regularized incomplete beta I_x(a, b) for a, b > 0 and x in [0, 1],
// evaluated by Lentz's continued fraction.
double incomplete_beta(double a, double b, double x);

// Student-t CDF with `df` degrees of freedom (df > 0).
double student_t_cdf(double t, double df);

// P(|T| >= |t|).
double student_t_two_sided_p(double t, double df);

}  // namespace fomc_absa

#pragma once

// Distribution tails used for hypothesis tests.

#include <string>

namespace devchat::stats {

// Regularized lower and upper incomplete gamma functions P(a, x), Q(a, x)
// for a > 0, x >= 0.
double regularized_gamma_p(double a, double x);
double regularized_gamma_q(double a, double x);

// Upper tail of the chi-square distribution with `dof` degrees of freedom.
double chi_square_sf(double statistic, double dof);

// P(|Z| >= |z|) for standard normal Z.
double two_sided_normal_p(double z);

// Three significant figures; scientific notation below 1e-3 ("1.61e-14").
std::string format_p_value(double p);

// Conventional significance stars: *** < 0.001, ** < 0.01, * < 0.05.
std::string significance_stars(double p);

}  // namespace devchat::stats

#include "devchat/stats.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

namespace devchat::stats {

namespace {

constexpr int kMaxIterations = 1000;
constexpr double kEpsilon = 1e-16;
constexpr double kTiny = 1e-300;

// Power series for P(a, x); converges quickly for x < a + 1.
double gamma_p_series(double a, double x) {
  double term = 1.0 / a;
  double sum = term;
  for (int n = 1; n < kMaxIterations; ++n) {
    term *= x / (a + n);
    sum += term;
    if (std::fabs(term) < std::fabs(sum) * kEpsilon) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Lentz continued fraction for Q(a, x); converges quickly for x >= a + 1.
double gamma_q_fraction(double a, double x) {
  double b = x + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kMaxIterations; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < kEpsilon) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

void check(double a, double x) {
  if (!(a > 0.0) || !(x >= 0.0)) throw std::domain_error("incomplete gamma: need a > 0 and x >= 0");
}

}  // namespace

double regularized_gamma_p(double a, double x) {
  check(a, x);
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  return x < a + 1.0 ? gamma_p_series(a, x) : 1.0 - gamma_q_fraction(a, x);
}

double regularized_gamma_q(double a, double x) {
  check(a, x);
  if (x == 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  return x < a + 1.0 ? 1.0 - gamma_p_series(a, x) : gamma_q_fraction(a, x);
}

double chi_square_sf(double statistic, double dof) {
  if (statistic <= 0.0) return 1.0;
  return regularized_gamma_q(0.5 * dof, 0.5 * statistic);
}

double two_sided_normal_p(double z) {
  if (std::isnan(z)) return std::numeric_limits<double>::quiet_NaN();
  return std::erfc(std::fabs(z) / std::sqrt(2.0));
}

std::string format_p_value(double p) {
  char buffer[32];
  if (std::isnan(p)) return "nan";
  if (p == 0.0) return "0";
  if (p < 1e-3) {
    std::snprintf(buffer, sizeof buffer, "%.2e", p);
  } else {
    std::snprintf(buffer, sizeof buffer, "%.3g", p);
  }
  return buffer;
}

std::string significance_stars(double p) {
  if (p < 0.001) return "***";
  if (p < 0.01) return "**";
  if (p < 0.05) return "*";
  return "";
}

}  // namespace devchat::stats

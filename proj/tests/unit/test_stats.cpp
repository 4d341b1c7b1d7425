#include <doctest.h>

#include <cmath>

#include <boost/math/special_functions/gamma.hpp>

#include "devchat/random.hpp"
#include "devchat/stats.hpp"

using namespace devchat;

TEST_SUITE("stats") {
  TEST_CASE("regularized incomplete gamma matches the Boost oracle") {
    Rng rng(3);
    for (int i = 0; i < 2000; ++i) {
      const double a = 0.05 + 40.0 * rng.uniform();
      const double x = 80.0 * rng.uniform() * rng.uniform();
      const double p = boost::math::gamma_p(a, x);
      const double q = boost::math::gamma_q(a, x);
      CHECK(stats::regularized_gamma_p(a, x) == doctest::Approx(p).epsilon(1e-10));
      // Q is checked relative to itself so deep-tail values count.
      const double ours = stats::regularized_gamma_q(a, x);
      CHECK(std::abs(ours - q) <= 1e-10 * q + 1e-15);
    }
  }

  TEST_CASE("chi-square survival function") {
    CHECK(stats::chi_square_sf(3.841458820694124, 1) == doctest::Approx(0.05).epsilon(1e-9));
    CHECK(stats::chi_square_sf(12.591587243743977, 6) == doctest::Approx(0.05).epsilon(1e-9));
    CHECK(stats::chi_square_sf(0.0, 4) == 1.0);
    const double tail = stats::chi_square_sf(297.0, 6);
    CHECK(tail > 0.0);
    CHECK(tail == doctest::Approx(boost::math::gamma_q(3.0, 148.5)).epsilon(1e-9));
  }

  TEST_CASE("normal p-values") {
    CHECK(stats::two_sided_normal_p(1.959963984540054) == doctest::Approx(0.05).epsilon(1e-12));
    CHECK(stats::two_sided_normal_p(0.0) == 1.0);
    CHECK(stats::two_sided_normal_p(-3.0) == stats::two_sided_normal_p(3.0));
  }

  TEST_CASE("p-value display and stars") {
    CHECK(stats::format_p_value(0.0123) == "0.0123");
    CHECK(stats::format_p_value(1.61e-14) == "1.61e-14");
    CHECK(stats::significance_stars(0.0005) == "***");
    CHECK(stats::significance_stars(0.005) == "**");
    CHECK(stats::significance_stars(0.03) == "*");
    CHECK(stats::significance_stars(0.2).empty());
  }

  TEST_CASE("domain errors") {
    CHECK_THROWS(stats::regularized_gamma_p(0.0, 1.0));
    CHECK_THROWS(stats::regularized_gamma_q(1.0, -1.0));
  }
}

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "devchat/error.hpp"
#include "devchat/featureproc.hpp"
#include "devchat/random.hpp"
#include "oracles.hpp"

using namespace devchat;

namespace {

Eigen::MatrixXd random_matrix(Rng& rng, Eigen::Index n, Eigen::Index p, bool with_ties) {
  Eigen::MatrixXd m(n, p);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) {
      m(i, j) = with_ties ? static_cast<double>(rng.index(4)) : rng.normal();
    }
  }
  return m;
}

}  // namespace

TEST_SUITE("featureproc") {
  TEST_CASE("minmax examples") {
    Eigen::MatrixXd m(3, 3);
    m << 0, 3, -100, 5, 3, 0, 10, 3, 100;
    const auto r = minmax_normalize(m);
    CHECK(r.matrix(0, 0) == 0.0);
    CHECK(r.matrix(1, 0) == 0.5);
    CHECK(r.matrix(2, 0) == 1.0);
    CHECK(r.matrix.col(1).isZero());
    CHECK(r.constant_columns == std::vector<std::size_t>{1});
    CHECK(r.matrix(0, 2) == 0.0);
    CHECK(r.matrix(2, 2) == 1.0);
    CHECK_THROWS_AS(minmax_normalize(Eigen::MatrixXd(0, 2)), ValidationError);
  }

  TEST_CASE("minmax range and persisted round trip") {
    Rng rng(11);
    for (int trial = 0; trial < 50; ++trial) {
      const Eigen::MatrixXd m = random_matrix(rng, 30, 6, trial % 2 == 0) * 37.0;
      const auto r = minmax_normalize(m);
      CHECK(r.matrix.minCoeff() >= 0.0);
      CHECK(r.matrix.maxCoeff() <= 1.0);
      const Eigen::MatrixXd again = apply_normalization(m, r.params);
      CHECK(again == r.matrix);
    }
  }

  TEST_CASE("held-out values may leave the unit interval") {
    Eigen::MatrixXd train(2, 1), test(1, 1);
    train << 0, 10;
    test << 20;
    const auto r = minmax_normalize(train);
    CHECK(apply_normalization(test, r.params)(0, 0) == 2.0);
  }

  TEST_CASE("average ranks") {
    Eigen::VectorXd v(5);
    v << 3, 1, 3, 2, 3;
    Eigen::VectorXd expected(5);
    expected << 4, 1, 4, 2, 4;
    CHECK(average_ranks(v) == expected);
  }

  TEST_CASE("spearman matches rank-then-pearson oracle") {
    Rng rng(5);
    for (int trial = 0; trial < 100; ++trial) {
      const Eigen::MatrixXd m = random_matrix(rng, 20 + trial % 7, 2 + trial % 5, trial % 3 == 0);
      const Eigen::MatrixXd got = spearman_matrix(m);
      const Eigen::MatrixXd want = oracle::spearman(m);
      CHECK((got - want).cwiseAbs().maxCoeff() <= 1e-12);
      CHECK((got - got.transpose()).cwiseAbs().maxCoeff() == 0.0);
    }
  }

  TEST_CASE("spearman examples and monotone invariance") {
    Rng rng(3);
    Eigen::MatrixXd m(50, 3);
    for (Eigen::Index i = 0; i < 50; ++i) {
      const double x = rng.normal();
      m(i, 0) = x;
      m(i, 1) = x * x * x;
      m(i, 2) = -x;
    }
    const auto s = spearman_matrix(m);
    CHECK(s(0, 1) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(s(0, 2) == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(s(1, 1) == 1.0);

    Eigen::MatrixXd c(4, 2);
    c << 1, 7, 2, 7, 3, 7, 4, 7;
    const auto sc = spearman_matrix(c);
    CHECK(sc(0, 1) == 0.0);
    CHECK(sc(1, 1) == 1.0);
  }

  TEST_CASE("vif matches OLS oracle") {
    Rng rng(8);
    for (int trial = 0; trial < 30; ++trial) {
      Eigen::MatrixXd m = random_matrix(rng, 60, 5, false);
      m.col(4) = 0.6 * m.col(0) - 0.3 * m.col(1) + 0.5 * m.col(4);
      const auto v = vif(m);
      for (Eigen::Index j = 0; j < m.cols(); ++j) {
        const double want = oracle::vif_by_ols(m, j);
        CHECK(std::abs(v[static_cast<std::size_t>(j)] - want) <= 1e-8 * std::max(1.0, want));
      }
    }
  }

  TEST_CASE("vif examples") {
    Eigen::MatrixXd orth(4, 2);
    orth << 1, 1, 1, -1, -1, 1, -1, -1;
    for (double v : vif(orth)) CHECK(v == doctest::Approx(1.0));

    Rng rng(2);
    Eigen::MatrixXd dup = random_matrix(rng, 40, 3, false);
    dup.col(2) = dup.col(0);
    const auto vd = vif(dup);
    CHECK(vd[0] == kInfiniteVif);
    CHECK(vd[2] == kInfiniteVif);

    Eigen::MatrixXd abc = random_matrix(rng, 200, 3, false);
    for (Eigen::Index i = 0; i < 200; ++i) abc(i, 2) = abc(i, 0) + abc(i, 1) + 0.01 * rng.normal();
    const auto va = vif(abc);
    CHECK(va[2] > 1000.0);
    CHECK(va[2] == doctest::Approx(oracle::vif_by_ols(abc, 2)).epsilon(1e-8));
  }

  TEST_CASE("vif prune") {
    Rng rng(4);
    const Eigen::MatrixXd indep = random_matrix(rng, 200, 4, false);
    CHECK(vif_prune(indep, 10.0).dropped.empty());

    Eigen::MatrixXd red = random_matrix(rng, 200, 4, false);
    for (Eigen::Index i = 0; i < 200; ++i) red(i, 1) = red(i, 0) + red(i, 2) + 0.01 * rng.normal();
    const auto p = vif_prune(red, 10.0);
    REQUIRE(p.dropped.size() == 1);
    CHECK(p.dropped[0].column == 1);
    CHECK(p.retained == std::vector<std::size_t>{0, 2, 3});

    Eigen::MatrixXd twins = random_matrix(rng, 100, 2, false);
    twins.col(1) = twins.col(0);
    const auto t = vif_prune(twins, 10.0);
    REQUIRE(t.dropped.size() == 1);
    CHECK(t.dropped[0].column == 1);
  }

  TEST_CASE("correlation prune") {
    Rng rng(9);
    Eigen::MatrixXd same(100, 2);
    same.col(0) = random_matrix(rng, 100, 1, false);
    same.col(1) = same.col(0);
    CHECK(correlation_prune(same, 0.3, 1).retained.size() == 1);

    const Eigen::MatrixXd indep = random_matrix(rng, 1000, 2, false);
    CHECK(correlation_prune(indep, 0.3, 1).retained.size() == 2);

    Eigen::MatrixXd abc = random_matrix(rng, 1000, 3, false);
    abc.col(1) = abc.col(0) + 0.2 * abc.col(1);
    bool saw_a = false, saw_b = false;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const auto r = correlation_prune(abc, 0.3, seed);
      REQUIRE(r.retained.size() == 2);
      CHECK(r.retained.back() == 2);
      saw_a |= r.retained.front() == 0;
      saw_b |= r.retained.front() == 1;
      CHECK(r.merges.size() == 2);
      CHECK(r.retained == correlation_prune(abc, 0.3, seed).retained);
    }
    CHECK((saw_a && saw_b));
    CHECK_THROWS_AS(correlation_prune(Eigen::MatrixXd(0, 0), 0.3, 1), ValidationError);
    CHECK_THROWS_AS(correlation_prune(abc, 1.0, 1), ValidationError);
  }

  TEST_CASE("prune pipeline report") {
    Rng rng(12);
    Eigen::MatrixXd m = random_matrix(rng, 300, 5, false);
    m.col(1) = m.col(0) * 2.0 + 0.01 * m.col(1);
    m.col(3).setConstant(4.0);
    const std::vector<std::string> names{"a", "b", "c", "k", "e"};
    const auto r = prune_features(m, names, {0.3, 10.0, 7});
    CHECK(r.report.constant_dropped == std::vector<std::string>{"k"});
    CHECK(r.report.correlation_dropped.size() == 1);
    CHECK(r.report.retained_columns.size() == 3);
    CHECK(r.matrix.cols() == 3);
    CHECK(r.matrix.minCoeff() >= 0.0);
    CHECK(r.matrix.maxCoeff() <= 1.0);
    const auto j = to_json(r.report);
    CHECK(j.dump() == to_json(prune_features(m, names, {0.3, 10.0, 7}).report).dump());
  }
}

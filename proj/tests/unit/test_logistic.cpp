#include <doctest.h>

#include <cmath>

#include "devchat/error.hpp"
#include "devchat/model.hpp"
#include "devchat/synth.hpp"

using namespace devchat;

namespace {

DesignMatrix tiny(std::initializer_list<std::pair<double, int>> rows) {
  DesignMatrix dm;
  dm.x.resize(static_cast<Eigen::Index>(rows.size()), 1);
  Eigen::Index i = 0;
  for (const auto& [x, y] : rows) {
    dm.x(i++, 0) = x;
    dm.y.push_back(y);
    dm.group.push_back(0);
    dm.row_ids.push_back(std::to_string(i));
    dm.synthetic.push_back(false);
  }
  dm.group_names = {"g"};
  dm.feature_names = {"x"};
  return dm;
}

}  // namespace

TEST_SUITE("logistic") {
  TEST_CASE("recovers planted coefficients") {
    synth::DesignSpec spec;
    spec.rows = 5000;
    spec.intercept = 1.0;
    spec.slopes = {-2.0};
    spec.group_intercepts = {0.0};
    const auto planted = synth::planted_design(spec, 42);
    const auto fit = fit_logistic(planted.dm);
    CHECK(fit.converged);
    CHECK_FALSE(fit.separation);
    CHECK(std::abs(fit.beta[0] - 1.0) < 0.1);
    CHECK(std::abs(fit.beta[1] + 2.0) < 0.1);
    CHECK(fit.names == std::vector<std::string>{"(Intercept)", "signal1"});
    CHECK(fit.aic == doctest::Approx(2.0 * 2 - 2.0 * fit.log_lik));
    CHECK((fit.se.array() > 0.0).all());
  }

  TEST_CASE("all-zero column gets coefficient zero") {
    synth::DesignSpec spec;
    spec.rows = 500;
    spec.slopes = {0.7, 0.0};
    spec.group_intercepts = {0.0};
    auto planted = synth::planted_design(spec, 3);
    planted.dm.x.col(1).setZero();
    const auto fit = fit_logistic(planted.dm);
    CHECK(fit.converged);
    CHECK(std::abs(fit.beta[2]) < 1e-12);
  }

  TEST_CASE("separable data stays finite and is flagged") {
    const auto dm = tiny({{-2, 0}, {-1, 0}, {1, 1}, {2, 1}});
    const auto fit = fit_logistic(dm);
    CHECK(fit.separation);
    CHECK(std::isfinite(fit.beta[1]));
    CHECK(fit.beta[1] > 0.0);
    CHECK(std::isfinite(fit.log_lik));
  }

  TEST_CASE("intercept-only matches the closed form") {
    const auto dm = tiny({{0, 1}, {0, 0}, {0, 0}, {0, 0}});
    auto only = dm.select_columns(std::vector<std::size_t>{});
    const auto fit = fit_logistic(only);
    CHECK(fit.beta[0] == doctest::Approx(std::log(1.0 / 3.0)).epsilon(1e-8));
    CHECK(fit.log_lik == doctest::Approx(std::log(0.25) + 3 * std::log(0.75)).epsilon(1e-10));
  }

  TEST_CASE("design validation") {
    auto dm = tiny({{0, 1}, {1, 0}});
    dm.y[0] = 2;
    CHECK_THROWS_AS(dm.validate(), ValidationError);
    auto short_groups = tiny({{0, 1}, {1, 0}});
    short_groups.group.pop_back();
    CHECK_THROWS_AS(short_groups.validate(), ValidationError);
  }

  TEST_CASE("design from feature table") {
    FeatureTable t;
    t.columns = {"a", "b"};
    t.rows.push_back({"1", "team#x", {0.5, 1.0}, ResolutionStatus::Resolved});
    t.rows.push_back({"2", "team#y", {0.1, 0.0}, ResolutionStatus::Unresolved});
    t.rows.push_back({"3", "team#x", {0.2, 0.0}, ResolutionStatus::Unresolved});
    const auto dm = design_from_table(t);
    CHECK(dm.rows() == 3);
    CHECK(dm.cols() == 2);
    CHECK(dm.y == std::vector<int>{1, 0, 0});
    CHECK(dm.group_names.size() == 2);
    CHECK(dm.group[0] == dm.group[2]);
    CHECK(dm.group[0] != dm.group[1]);
    const std::vector<std::size_t> keep{1};
    const auto sub = dm.select_columns(keep);
    CHECK(sub.feature_names == std::vector<std::string>{"b"});
    const std::vector<std::size_t> rows{2, 0};
    const auto r = dm.select_rows(rows);
    CHECK(r.row_ids == std::vector<std::string>{"team#x/3", "team#x/1"});
  }
}

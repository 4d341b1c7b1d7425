#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "devchat/evaluation.hpp"
#include "devchat/random.hpp"
#include "devchat/synth.hpp"

using namespace devchat;

namespace {

EvaluationOptions with(SamplingStrategy s, bool mixed = true) {
  EvaluationOptions o;
  o.strategy = s;
  o.mixed = mixed;
  return o;
}

}  // namespace

TEST_SUITE("evaluation") {
  TEST_CASE("stratified folds keep class balance") {
    std::vector<int> y;
    for (int i = 0; i < 103; ++i) y.push_back(i % 4 == 0 ? 1 : 0);
    const auto folds = stratified_folds(y, 5, 3);
    REQUIRE(folds.size() == y.size());
    for (std::size_t f = 0; f < 5; ++f) {
      std::size_t pos = 0, total = 0;
      for (std::size_t i = 0; i < y.size(); ++i) {
        if (folds[i] != f) continue;
        ++total;
        pos += static_cast<std::size_t>(y[i]);
      }
      CHECK(total >= 20);
      CHECK(total <= 21);
      CHECK(pos >= 5);
      CHECK(pos <= 6);
    }
    CHECK(stratified_folds(y, 5, 3) == folds);
  }

  TEST_CASE("perfect predictor") {
    synth::DesignSpec spec;
    spec.rows = 600;
    spec.slopes = {1.0};
    spec.group_intercepts = {0.0, 0.0};
    auto planted = synth::planted_design(spec, 2);
    for (std::size_t i = 0; i < planted.dm.rows(); ++i) {
      planted.dm.y[i] = planted.dm.x(static_cast<Eigen::Index>(i), 0) > 0.3 ? 1 : 0;
    }
    const auto cv = kfold_cv(planted.dm, 5, 1, with(SamplingStrategy::Undersample));
    CHECK(cv.mean_auc >= 0.99);
    CHECK(cv.fold_auc.size() == 5);
    const auto bs = bootstrap_eval(planted.dm, 10, 1, with(SamplingStrategy::None, false));
    CHECK(bs.mean_auc >= 0.99);
  }

  TEST_CASE("pure noise sits near one half") {
    synth::DesignSpec spec;
    spec.rows = 2000;
    spec.slopes = {0.0, 0.0, 0.0};
    spec.group_intercepts = {0.0, 0.0};
    const auto planted = synth::planted_design(spec, 13);
    const auto cv = kfold_cv(planted.dm, 5, 4, with(SamplingStrategy::None, false));
    CHECK(cv.mean_auc >= 0.45);
    CHECK(cv.mean_auc <= 0.55);
  }

  TEST_CASE("fold count and bootstrap agree on planted signal") {
    synth::DesignSpec spec;
    spec.rows = 4000;
    const auto planted = synth::planted_design(spec, 8);
    const auto opt = with(SamplingStrategy::Smote);
    const auto five = kfold_cv(planted.dm, 5, 1, opt);
    const auto ten = kfold_cv(planted.dm, 10, 2, opt);
    const auto bs = bootstrap_eval(planted.dm, 20, 3, opt);
    CHECK(std::abs(five.mean_auc - ten.mean_auc) < 0.02);
    CHECK(std::abs(bs.mean_auc - ten.mean_auc) < 0.02);
    CHECK(five.synthetic_rows > 0);
    const auto again = bootstrap_eval(planted.dm, 20, 3, opt);
    CHECK(again.auc == bs.auc);
  }

  TEST_CASE("sampling order flag resamples before the split") {
    synth::DesignSpec spec;
    spec.rows = 1000;
    spec.intercept = -1.5;
    const auto planted = synth::planted_design(spec, 9);
    auto inside = with(SamplingStrategy::Undersample, false);
    auto before = inside;
    before.order = SamplingOrder::BeforeSplit;
    const auto a = kfold_cv(planted.dm, 5, 1, inside);
    const auto b = kfold_cv(planted.dm, 5, 1, before);
    CHECK(a.removed_rows > 0);
    CHECK(b.removed_rows > 0);
    CHECK(a.fold_auc != b.fold_auc);
  }

  TEST_CASE("parallel jobs give identical results") {
    synth::DesignSpec spec;
    spec.rows = 1500;
    const auto planted = synth::planted_design(spec, 10);
    auto opt = with(SamplingStrategy::Smote);
    const auto serial = kfold_cv(planted.dm, 5, 7, opt);
    opt.jobs = 3;
    const auto parallel = kfold_cv(planted.dm, 5, 7, opt);
    CHECK(serial.fold_auc == parallel.fold_auc);
  }

  TEST_CASE("baseline AUC") {
    Rng rng(1);
    std::vector<double> conf;
    std::vector<int> y;
    for (int i = 0; i < 4000; ++i) {
      conf.push_back(rng.uniform());
      y.push_back(rng.bernoulli(0.4) ? 1 : 0);
    }
    CHECK(std::abs(baseline_auc(conf, y) - 0.5) < 0.03);
    const std::vector<double> tied{0.5, 0.5, 0.5, 0.5};
    const std::vector<int> lab{1, 0, 1, 0};
    CHECK(baseline_auc(tied, lab) == 0.5);
  }

  TEST_CASE("result serialization") {
    CvResult r;
    r.folds = 2;
    r.fold_auc = {0.7, 0.8};
    r.mean_auc = 0.75;
    const auto j = to_json(r);
    CHECK(j["folds"] == 2);
    CHECK(j["mean_auc"].get<double>() == 0.75);
  }
}

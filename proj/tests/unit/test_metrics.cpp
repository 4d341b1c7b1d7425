#include <doctest.h>

#include <vector>

#include "devchat/error.hpp"
#include "devchat/metrics.hpp"
#include "devchat/random.hpp"
#include "oracles.hpp"

using namespace devchat;

namespace {

LabelSet with_entities(std::vector<EntitySpan> spans) {
  LabelSet l;
  l.conversation_id = "c";
  l.entities = std::move(spans);
  return l;
}

}  // namespace

TEST_SUITE("metrics") {
  TEST_CASE("scores follow the confusion-count definitions") {
    const auto s = scores({8, 2, 4, 6});
    CHECK(s.precision == doctest::Approx(0.8));
    CHECK(s.recall == doctest::Approx(8.0 / 12.0));
    CHECK(s.f_score == doctest::Approx(2 * 0.8 * (8.0 / 12.0) / (0.8 + 8.0 / 12.0)));
    CHECK(s.accuracy == doctest::Approx(0.7));
    const auto zero = scores({});
    CHECK(zero.precision == 0.0);
    CHECK(zero.f_score == 0.0);
    CHECK(zero.accuracy == 0.0);
  }

  TEST_CASE("kappa on a 2x2 table") {
    // [[20, 5], [10, 15]]: rater A rows, rater B columns.
    std::vector<int> a, b;
    auto add = [&](int x, int y, int n) {
      for (int i = 0; i < n; ++i) {
        a.push_back(x);
        b.push_back(y);
      }
    };
    add(1, 1, 20);
    add(1, 0, 5);
    add(0, 1, 10);
    add(0, 0, 15);
    CHECK(cohen_kappa(a, b) == doctest::Approx(0.4).epsilon(1e-12));
    CHECK(cohen_kappa(a, a) == doctest::Approx(1.0));
    CHECK_THROWS_AS(cohen_kappa(std::vector<int>{}, std::vector<int>{}), ValidationError);
    CHECK_THROWS_AS(cohen_kappa(std::vector<int>{1}, std::vector<int>{1, 0}), ValidationError);
  }

  TEST_CASE("auc equals the all-pairs count, ties included") {
    Rng rng(21);
    for (int trial = 0; trial < 100; ++trial) {
      std::vector<double> s(40);
      std::vector<int> y(40);
      for (std::size_t i = 0; i < s.size(); ++i) {
        s[i] = static_cast<double>(rng.index(8));  // many ties
        y[i] = static_cast<int>(i % 3 == 0);
      }
      CHECK(auc(s, y) == oracle::auc_all_pairs(s, y));
    }
    CHECK(auc(std::vector<double>{0.1, 0.9}, std::vector<int>{0, 1}) == 1.0);
    CHECK_THROWS_AS(auc(std::vector<double>{0.1, 0.9}, std::vector<int>{1, 1}), ValidationError);
  }

  TEST_CASE("tokenizer keeps dotted names and code spans whole") {
    const auto tokens = tokenize("Use numpy.mean() in `df.groupby('a').sum()` now.");
    std::vector<std::string> texts;
    for (const auto& t : tokens) texts.push_back(t.text);
    CHECK(texts == std::vector<std::string>{"Use", "numpy.mean", "(", ")", "in", "`", "df.groupby('a').sum()", "`",
                                            "now", "."});
  }

  TEST_CASE("token-level entity confusion") {
    const std::string text = "I use TensorFlow version 2.5 on Linux";
    const auto golden = with_entities({{"TensorFlow", EntityKind::Library, {}},
                                       {"2.5", EntityKind::Version, {}},
                                       {"Linux", EntityKind::OperationSystem, {}}});
    const auto predicted = with_entities({{"TensorFlow", EntityKind::Library, {}},
                                          {"2.5", EntityKind::Value, {}},
                                          {"version", EntityKind::Version, {}},
                                          {"Windows", EntityKind::OperationSystem, {}}});
    const auto c = ner_token_confusion(golden, predicted, text);
    CHECK(c.token_count == 7);
    CHECK(c.counts.tp == 1);             // TensorFlow
    CHECK(c.counts.fp == 3);             // 2.5 as Value, version, unlocatable Windows
    CHECK(c.counts.fn == 2);             // 2.5 as Version, Linux
    CHECK(c.counts.tn == 3);             // I, use, on
    CHECK(c.unaligned_predicted == 1);
    CHECK(c.per_kind[static_cast<std::size_t>(EntityKind::Library)].tp == 1);
    CHECK(c.per_kind[static_cast<std::size_t>(EntityKind::Version)].fn == 1);
    CHECK(c.per_kind[static_cast<std::size_t>(EntityKind::Version)].fp == 1);
  }

  TEST_CASE("repeated surfaces claim successive occurrences") {
    const std::string text = "numpy and numpy";
    const auto golden = with_entities({{"numpy", EntityKind::Library, {}}, {"numpy", EntityKind::Library, {}}});
    const auto predicted = with_entities({{"numpy", EntityKind::Library, {}}});
    const auto c = ner_token_confusion(golden, predicted, text);
    CHECK(c.counts.tp == 1);
    CHECK(c.counts.fn == 1);
    CHECK(c.counts.tn == 1);
  }

  TEST_CASE("intent and resolution confusion") {
    LabelSet g, p;
    g.intents = {IntentKind::Errors, IntentKind::Learning};
    p.intents = {IntentKind::Errors, IntentKind::Review};
    const auto c = intent_confusion(g, p);
    CHECK(c == ConfusionCounts{1, 1, 1, 4});
    g.resolution = ResolutionStatus::Resolved;
    p.resolution = ResolutionStatus::Unresolved;
    CHECK(resolution_confusion(g, p) == ConfusionCounts{0, 0, 1, 0});
  }

  TEST_CASE("evaluate_labels micro-averages over conversations") {
    LabelSet g1, p1, g2, p2;
    g1.conversation_id = "1";
    g1.intents = p1.intents = {IntentKind::Errors};
    g1.resolution = p1.resolution = ResolutionStatus::Resolved;
    g2.conversation_id = "2";
    g2.intents = {IntentKind::Learning};
    p2.intents = {IntentKind::Conceptual};
    g2.resolution = ResolutionStatus::Unresolved;
    p2.resolution = ResolutionStatus::Resolved;
    g1.entities = p1.entities = {{"Python", EntityKind::ProgrammingLanguage, {}}};
    std::vector<GoldenPair> pairs{{&g1, &p1, "Python question"}, {&g2, &p2, "another question"}};
    const auto report = evaluate_labels(pairs);
    CHECK(report.conversations == 2);
    CHECK(report.intents == ConfusionCounts{1, 1, 1, 11});
    CHECK(report.resolution == ConfusionCounts{1, 1, 0, 0});
    CHECK(report.entities.counts.tp == 1);
    CHECK(report.entities.counts.tn == 3);
    const auto j = to_json(report);
    CHECK(j["tasks"].size() == 3);
    CHECK(j["tasks"][1]["task"] == "Intent Detection");
  }
}

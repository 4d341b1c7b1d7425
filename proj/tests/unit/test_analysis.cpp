#include <doctest.h>

#include <cmath>
#include <sstream>

#include "devchat/analysis.hpp"
#include "devchat/error.hpp"
#include "devchat/random.hpp"
#include "reference_counts.hpp"

using namespace devchat;

namespace {

LabelSet make(std::initializer_list<EntityKind> kinds, IntentSet intents, bool resolved) {
  LabelSet l;
  for (auto k : kinds) l.entities.push_back({"x", k, {}});
  l.intents = intents;
  l.resolution = resolved ? ResolutionStatus::Resolved : ResolutionStatus::Unresolved;
  return l;
}

ContingencyTable table(std::vector<std::vector<std::uint64_t>> counts) {
  ContingencyTable t;
  for (std::size_t i = 0; i < counts.size(); ++i) t.row_labels.push_back("r" + std::to_string(i));
  t.column_labels = {"resolved", "unresolved"};
  t.counts = std::move(counts);
  return t;
}

ContingencyTable reference_table() {
  std::vector<std::vector<std::uint64_t>> c;
  for (const auto& r : reference::kIntentCounts) c.push_back({r.successes, r.total - r.successes});
  return table(c);
}

}  // namespace

TEST_SUITE("analysis") {
  TEST_CASE("intent success rates from reference counts") {
    for (const auto& r : reference::kIntentCounts) {
      IntentSuccessRow row{std::string(r.intent), r.successes, r.total};
      CHECK(std::abs(row.rate_percent() - r.percent) <= 0.05 + 1e-9);
    }
  }

  TEST_CASE("intent table is multi-label with a per-conversation overall row") {
    std::vector<LabelSet> labels{
        make({}, {IntentKind::ApiUsage, IntentKind::Errors}, true),
        make({}, {IntentKind::Errors}, false),
        make({}, {}, false),
    };
    const auto rows = intent_success_table(labels);
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].label == "API Usage");
    CHECK(rows[0].successes == 1);
    CHECK(rows[1].label == "Errors");
    CHECK(rows[1].total == 2);
    CHECK(rows[2].label == "Overall");
    CHECK(rows[2].total == 3);
    CHECK(rows[2].successes == 1);
    const auto ct = intent_contingency(rows);
    CHECK(ct.counts.size() == 2);
    CHECK(ct.counts[1] == std::vector<std::uint64_t>{1, 1});

    std::ostringstream csv;
    write_intent_success_csv(csv, rows);
    CHECK(csv.str().rfind("intent,success_rate_percent,successes,total\n", 0) == 0);
    CHECK(csv.str().find("Errors,50.0,1,2\n") != std::string::npos);
  }

  TEST_CASE("all resolved gives 100 percent") {
    std::vector<LabelSet> labels{make({}, {IntentKind::Review}, true), make({}, {IntentKind::Learning}, true)};
    for (const auto& r : intent_success_table(labels)) CHECK(r.rate_percent() == 100.0);
  }

  TEST_CASE("chi-square hand examples") {
    const auto zero = chi_square_independence(table({{10, 10}, {10, 10}}));
    CHECK(zero.statistic == 0.0);
    CHECK(zero.p_value == doctest::Approx(1.0));
    const auto r = chi_square_independence(table({{20, 10}, {10, 20}}));
    CHECK(r.statistic == doctest::Approx(20.0 / 3.0).epsilon(1e-12));
    CHECK(r.dof == 1);
    CHECK(r.p_value == doctest::Approx(0.009823).epsilon(1e-3));
  }

  TEST_CASE("chi-square on the reference counts") {
    const auto r = chi_square_independence(reference_table());
    CHECK(r.dof == reference::kChiSquareDof);
    CHECK(r.p_value < 1e-13);
    CHECK(r.statistic == doctest::Approx(297.55).epsilon(1e-3));
  }

  TEST_CASE("chi-square properties") {
    Rng rng(17);
    for (int trial = 0; trial < 50; ++trial) {
      std::vector<std::vector<std::uint64_t>> c;
      const std::size_t rows = 2 + rng.index(5);
      for (std::size_t i = 0; i < rows; ++i) c.push_back({1 + rng.index(50), 1 + rng.index(50)});
      const auto base = chi_square_independence(table(c));
      CHECK(base.statistic >= 0.0);
      const std::uint64_t m = 2 + rng.index(4);
      auto scaled = c;
      for (auto& row : scaled) {
        for (auto& v : row) v *= m;
      }
      const auto s = chi_square_independence(table(scaled));
      CHECK(s.dof == base.dof);
      CHECK(s.statistic == doctest::Approx(base.statistic * static_cast<double>(m)).epsilon(1e-9));
    }
  }

  TEST_CASE("chi-square errors and exclusions") {
    CHECK_THROWS_AS(chi_square_independence(table({{5, 5}})), ValidationError);
    CHECK_THROWS_AS(chi_square_independence(table({{5, 0}, {3, 0}})), ValidationError);
    const auto r = chi_square_independence(table({{5, 5}, {0, 0}, {2, 8}}));
    CHECK(r.excluded_rows == 1);
    CHECK(r.dof == 1);
    const auto j = to_json(r);
    CHECK(j.contains("p_display"));
    CHECK(j["excluded_rows"] == 1);
  }

  TEST_CASE("entity pairs") {
    CHECK(entity_pairs(make({EntityKind::Device, EntityKind::Application, EntityKind::Library}, {}, true)).size() == 3);
    CHECK(entity_pairs(make({EntityKind::Library, EntityKind::Library}, {}, true)).empty());
    const auto five = entity_pairs(make({EntityKind::Device, EntityKind::Application, EntityKind::Library,
                                         EntityKind::Version, EntityKind::Website},
                                        {}, true));
    CHECK(five.size() == 10);
    for (const auto& [a, b] : five) CHECK(a < b);
  }

  TEST_CASE("pair table filtering and rates") {
    std::vector<LabelSet> labels;
    for (int i = 0; i < 10; ++i) labels.push_back(make({EntityKind::Library, EntityKind::Version}, {IntentKind::Errors}, i < 8));
    for (int i = 0; i < 9; ++i) labels.push_back(make({EntityKind::Device, EntityKind::Website}, {IntentKind::Errors}, true));
    const auto t = pair_success_table(labels, 10);
    const auto errors = top_pairs(t, IntentKind::Errors, 5);
    REQUIRE(errors.size() == 1);
    CHECK(errors[0].pair == EntityPair{EntityKind::Version, EntityKind::Library});
    CHECK(errors[0].rate() == doctest::Approx(0.8));
    CHECK(errors[0].total == 10);
    const auto all = top_pairs(t, std::nullopt, 5);
    REQUIRE(all.size() == 1);
    CHECK(t.filtered_out >= 1);
    CHECK(pair_success_table(labels, 9).records.size() == 4);

    std::ostringstream csv;
    write_pair_csv(csv, t);
    CHECK(csv.str().find("Errors") != std::string::npos);
  }

  TEST_CASE("pair totals equal the per-conversation pair counts") {
    Rng rng(23);
    std::vector<LabelSet> labels;
    std::uint64_t expected = 0;
    for (int i = 0; i < 300; ++i) {
      LabelSet l;
      const std::size_t m = rng.index(6);
      for (std::size_t k = 0; k < m; ++k) l.entities.push_back({"e", static_cast<EntityKind>(rng.index(8)), {}});
      l.intents.insert(IntentKind::Learning);
      l.resolution = rng.bernoulli(0.3) ? ResolutionStatus::Resolved : ResolutionStatus::Unresolved;
      expected += entity_pairs(l).size();
      labels.push_back(std::move(l));
    }
    const auto t = pair_success_table(labels, 0);
    std::uint64_t total = 0;
    for (const auto& r : t.records) {
      if (r.intent == IntentKind::Learning) total += r.total;
    }
    CHECK(total == expected);
    const auto bottom = bottom_pairs(t, IntentKind::Learning, 3);
    const auto top = top_pairs(t, IntentKind::Learning, 3);
    REQUIRE(bottom.size() == 3);
    CHECK(top.front().rate() >= bottom.front().rate());
  }

  TEST_CASE("coverage") {
    std::vector<LabelSet> single{make({EntityKind::Library}, {}, true)};
    CHECK(coverage_stat(single) == 0.0);
    std::vector<LabelSet> mixed{
        make({EntityKind::Library, EntityKind::Version}, {}, true),
        make({EntityKind::Device, EntityKind::Website}, {}, true),
        make({EntityKind::Device, EntityKind::Value, EntityKind::Website}, {}, false),
        make({EntityKind::Device}, {}, false),
    };
    CHECK(coverage_stat(mixed) == 0.75);
  }
}

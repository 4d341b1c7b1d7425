#include <doctest.h>

#include <sstream>

#include "devchat/error.hpp"
#include "devchat/features.hpp"

using namespace devchat;

namespace {

Timestamp at(const char* text) { return parse_timestamp(text)->value; }

InitialQuestion question_at(const char* ts) {
  InitialQuestion q;
  q.asked_at = at(ts);
  return q;
}

Conversation conv(const std::string& id, const char* ts, std::vector<std::string> users) {
  Conversation c;
  c.id = id;
  c.channel = {"team", "chan", ""};
  std::int64_t offset = 0;
  int num = 1;
  for (const auto& u : users) {
    c.messages.push_back({id, num++, Timestamp::from_micros(at(ts).micros() + offset), u, "message from " + u});
    offset += 1'000'000;
  }
  c.start = c.messages.front().ts;
  c.end = c.messages.back().ts;
  return c;
}

}  // namespace

TEST_SUITE("features") {
  TEST_CASE("calendar features") {
    CHECK(weekday(question_at("2020-05-04T10:00:00")) == 0);  // Monday
    CHECK(weekday(question_at("2020-05-03T08:14:12")) == 6);  // Sunday
    CHECK(weekday(question_at("2020-02-29T12:00:00")) == 5);  // leap day, Saturday
    CHECK(daytime(question_at("2020-05-03T08:14:12")) == 8);
    CHECK(daytime(question_at("2020-05-03T00:00:00")) == 0);
    CHECK(daytime(question_at("2020-05-03T23:59:59")) == 23);
  }

  TEST_CASE("readability") {
    // 5 words, 42 letters, 1 sentence.
    CHECK(readability_cli("Existing computer programs measure readability.") ==
          doctest::Approx(0.0588 * 840 - 0.296 * 20 - 15.8));
    CHECK(readability_cli("hi") == doctest::Approx(0.0588 * 200 - 0.296 * 100 - 15.8));
    CHECK(readability_cli("no terminator here") == readability_cli("no terminator here."));
    CHECK(readability_cli("") == 0.0);
    CHECK(readability_cli("Two sentences. Here!") == doctest::Approx(0.0588 * (16.0 / 3 * 100) - 0.296 * (2.0 / 3 * 100) - 15.8));
    CHECK(readability_cli("Version 2.5 is out.") == readability_cli("Version 25 is out."));
  }

  TEST_CASE("text to code ratio") {
    CHECK(text_code_ratio("plain text") == 0.0);
    CHECK(text_code_ratio("x `y` z") == doctest::Approx(1.0 / 6.0));
    CHECK(text_code_ratio("```abc```") == doctest::Approx(3.0 / 6.0));
    CHECK(text_code_ratio("``") == 0.0);
  }

  TEST_CASE("counts and flags") {
    CHECK(count_urls("see https://a.b and http://c.d") == 2);
    CHECK(count_urls("visit www.example.org today") == 1);
    CHECK(count_urls("nothing here") == 0);
    CHECK(count_mentions("We have a Python resources channel. @Shira might help.") == 1);
    CHECK(count_mentions("mail me at a@b.com") == 0);
    CHECK(has_code("use `ls`"));
    CHECK(has_code("look:\n    x = 1\n"));
    CHECK_FALSE(has_code("no code"));
    CHECK(question_length("") == 0);
    CHECK(question_length("héllo") == 5);
  }

  TEST_CASE("sentiment") {
    CHECK(sentiment("thanks, great!") > 0.0);
    CHECK(sentiment("not good") < 0.0);
    CHECK(sentiment("The function returns a list of integers.") == 0.0);
    CHECK(sentiment_hits("The function returns a list of integers.") == 0);
    const double s = sentiment("awful terrible horrible broken useless");
    CHECK(s < 0.0);
    CHECK(s >= -1.0);
  }

  TEST_CASE("label-derived features") {
    LabelSet l;
    l.entities = {{"TensorFlow", EntityKind::Library, {}}, {"2.5", EntityKind::Version, {}}};
    l.intents = {IntentKind::Errors};
    auto f = entity_intent_features(l);
    CHECK(f[0] == 2);
    CHECK(f[1] == 2);
    CHECK(f[2] == 1);
    CHECK(f[3] == 1);
    CHECK(f[4 + static_cast<std::size_t>(IntentKind::Errors)] == 1);
    CHECK(f[4 + kIntentKindCount + static_cast<std::size_t>(EntityKind::Library)] == 1);
    CHECK(f[4 + kIntentKindCount + static_cast<std::size_t>(EntityKind::Version)] == 1);

    LabelSet three;
    three.entities = {{"a", EntityKind::Library, {}}, {"b", EntityKind::Library, {}}, {"c", EntityKind::Library, {}}};
    f = entity_intent_features(three);
    CHECK(f[0] == 3);
    CHECK(f[1] == 1);
    CHECK(f[2] == 3);

    f = entity_intent_features(LabelSet{});
    for (double v : f) CHECK(v == 0.0);
  }

  TEST_CASE("questioner history") {
    std::vector<Conversation> corpus{
        conv("1", "2021-01-01T00:00:00", {"ada", "bob"}),
        conv("2", "2021-01-02T00:00:00", {"ada"}),
        conv("3", "2021-01-03T00:00:00", {"ada", "ada", "ada", "bob"}),
        conv("4", "2021-01-04T00:00:00", {"ada"}),
    };
    const QuestionerHistory history(corpus);
    auto q = [&](std::size_t i) { return extract_initial_question(corpus[i]); };
    CHECK(received_response_ratio(history, q(0)) == 0.0);
    CHECK_FALSE(active_questioner(history, q(0)));
    CHECK(received_response_ratio(history, q(2)) == doctest::Approx(0.5));
    CHECK(history.prior_messages("team#chan", "ada", q(3).asked_at) == 5);
    CHECK(active_questioner(history, q(3), 5));
    CHECK_FALSE(active_questioner(history, q(2), 5));
    CHECK(received_response_ratio(history, q(3)) == doctest::Approx(2.0 / 3.0));
  }

  TEST_CASE("extraction joins labels and tallies the rest") {
    std::vector<Conversation> corpus{conv("1", "2021-01-01T00:00:00", {"ada", "bob"}),
                                     conv("2", "2021-01-02T00:00:00", {"cy"})};
    LabelSet l;
    l.conversation_id = "1";
    l.channel_key = "team#chan";
    l.resolution = ResolutionStatus::Resolved;
    l.intents = {IntentKind::Errors};
    const auto result = extract_features(corpus, std::vector<LabelSet>{l}, {5, true});
    CHECK(result.tallies.unlabeled_conversations == 1);
    REQUIRE(result.table.rows.size() == 1);
    CHECK(result.table.columns.size() == 51);
    CHECK(result.table.columns.back() == kSpecificIntentPresence);
    CHECK(result.table.rows[0].values.back() == 1.0);
    CHECK(result.table.rows[0].label == ResolutionStatus::Resolved);
  }

  TEST_CASE("CSV round-trip is exact") {
    FeatureTable t;
    t.columns = {"a", "b, with comma"};
    t.rows.push_back({"id,1", "team#chan", {0.1, 1.0 / 3.0}, ResolutionStatus::Resolved});
    t.rows.push_back({"id\"2", "team#chan", {-2.5e-300, std::numeric_limits<double>::infinity()},
                      ResolutionStatus::Unresolved});
    std::stringstream buf;
    write_feature_csv(buf, t);
    const auto back = read_feature_csv(buf);
    CHECK(back.columns == t.columns);
    REQUIRE(back.rows.size() == 2);
    CHECK(back.rows[0].values == t.rows[0].values);
    CHECK(back.rows[1].values == t.rows[1].values);
    CHECK(back.rows[0].conversation_id == "id,1");
    CHECK(back.rows[1].conversation_id == "id\"2");
    CHECK(back.rows[1].label == ResolutionStatus::Unresolved);

    std::stringstream bad("a,conversation_id,channel_key,label\nx,1,t,Resolved\n");
    CHECK_THROWS_AS(read_feature_csv(bad), ValidationError);
    std::stringstream no_trailer("a,b\n1,2\n");
    CHECK_THROWS_AS(read_feature_csv(no_trailer), ValidationError);
  }

  TEST_CASE("schema") {
    const auto& cols = feature_columns();
    CHECK(cols.size() == 50);
    CHECK(cols[0] == "Weekday");
    CHECK(cols[14] == "IntentTotalCount");
    CHECK(cols[15] == "API Usage");
    CHECK(cols[22] == "Application");
    CHECK(cols[49] == "Keyboard Input");
  }
}

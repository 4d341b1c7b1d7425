#include <doctest.h>

#include <set>
#include <sstream>

#include "devchat/error.hpp"
#include "devchat/taxonomy.hpp"

using namespace devchat;

TEST_SUITE("taxonomy") {
  TEST_CASE("closed vocabularies have the expected sizes and unique names") {
    std::set<std::string_view> entity_names, intent_names;
    for (auto k : all_entity_kinds()) entity_names.insert(display_name(k));
    for (auto k : all_intent_kinds()) intent_names.insert(display_name(k));
    CHECK(entity_names.size() == 28);
    CHECK(intent_names.size() == 7);
  }

  TEST_CASE("display names round-trip through the parser") {
    for (auto k : all_entity_kinds()) CHECK(parse_entity_kind(display_name(k)) == k);
    for (auto k : all_intent_kinds()) CHECK(parse_intent_kind(display_name(k)) == k);
    for (auto s : {ResolutionStatus::Resolved, ResolutionStatus::Unresolved}) {
      CHECK(parse_resolution_status(display_name(s)) == s);
    }
  }

  TEST_CASE("parsing ignores case, spacing and punctuation, and knows aliases") {
    CHECK(parse_entity_kind("programming_language") == EntityKind::ProgrammingLanguage);
    CHECK(parse_entity_kind("  PROGRAMMING-LANGUAGE ") == EntityKind::ProgrammingLanguage);
    CHECK(parse_entity_kind("html xml tag name") == EntityKind::HtmlXmlTagName);
    CHECK(parse_entity_kind("OS") == EntityKind::OperationSystem);
    CHECK(parse_intent_kind("api_usage") == IntentKind::ApiUsage);
    CHECK(parse_intent_kind("error") == IntentKind::Errors);
    CHECK(parse_resolution_status("UNRESOLVED") == ResolutionStatus::Unresolved);
  }

  TEST_CASE("unknown kinds carry the raw text") {
    try {
      parse_entity_kind("Spaceship");
      FAIL("expected UnknownKindError");
    } catch (const UnknownKindError& e) {
      CHECK(e.raw() == "Spaceship");
    }
    CHECK_FALSE(try_parse_intent_kind("Gossip"));
    CHECK_THROWS_AS(parse_resolution_status("maybe"), UnknownKindError);
  }

  TEST_CASE("intent sets behave like sets") {
    IntentSet a{IntentKind::Errors, IntentKind::Learning};
    IntentSet b{IntentKind::Learning, IntentKind::Review};
    CHECK(a.size() == 2);
    CHECK((a & b) == IntentSet{IntentKind::Learning});
    CHECK((a | b).size() == 3);
    CHECK(a.without(b) == IntentSet{IntentKind::Errors});
    a.insert(IntentKind::Errors);
    CHECK(a.size() == 2);
    CHECK(a.to_vector() == std::vector<IntentKind>{IntentKind::Errors, IntentKind::Learning});
  }

  TEST_CASE("label sets round-trip through JSON lines") {
    LabelSet labels;
    labels.conversation_id = "125";
    labels.channel_key = "Clojurians#clojure";
    labels.entities = {{"TensorFlow", EntityKind::Library, Timestamp::from_micros(1'600'000'000'000'000)},
                       {"2.5", EntityKind::Version, Timestamp::from_micros(1'600'000'000'000'000)}};
    labels.intents = {IntentKind::Errors, IntentKind::ApiUsage};
    labels.resolution = ResolutionStatus::Resolved;
    labels.source = LabelSource::Mock;
    std::stringstream buf;
    write_label_sets(buf, std::vector<LabelSet>{labels});
    const auto back = read_label_sets(buf);
    REQUIRE(back.size() == 1);
    CHECK(back[0].conversation_id == labels.conversation_id);
    CHECK(back[0].channel_key == labels.channel_key);
    CHECK(back[0].entities == labels.entities);
    CHECK(back[0].intents == labels.intents);
    CHECK(back[0].resolution == labels.resolution);
    CHECK(back[0].source == labels.source);

    std::stringstream bad(R"({"conversation_id": "1", "entities": [{"surface": "x", "kind": "Nope"}], "intents": [], "resolution": "Resolved"})");
    CHECK_THROWS_AS(read_label_sets(bad), ValidationError);
  }
}

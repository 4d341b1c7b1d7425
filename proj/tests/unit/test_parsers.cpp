#include <doctest.h>

#include "devchat/labeler.hpp"

using namespace devchat;

TEST_SUITE("parsers") {
  TEST_CASE("NER example response") {
    const auto parsed = parse_ner_response(R"(["TensorFlow: Library", "2.5: Version"])");
    REQUIRE(parsed.spans.size() == 2);
    CHECK(parsed.spans[0].surface == "TensorFlow");
    CHECK(parsed.spans[0].kind == EntityKind::Library);
    CHECK(parsed.spans[1].surface == "2.5");
    CHECK(parsed.spans[1].kind == EntityKind::Version);
    CHECK(parsed.dropped_items == 0);
  }

  TEST_CASE("NER response wrapped in prose, with bad items and colons in surfaces") {
    const auto parsed = parse_ner_response(
        "Sure! Here you go:\n```json\n[\"std::vector: Library Class\", \"Foo: Spaceship\", 42, \"no kind\"]\n```");
    REQUIRE(parsed.spans.size() == 1);
    CHECK(parsed.spans[0].surface == "std::vector");
    CHECK(parsed.spans[0].kind == EntityKind::LibraryClass);
    CHECK(parsed.dropped_items == 3);
    CHECK(parse_ner_response("[]").spans.empty());
    CHECK_THROWS_AS(parse_ner_response("I cannot find any entities."), ResponseParseError);
  }

  TEST_CASE("intent responses") {
    const auto parsed = parse_intent_response(R"(The intents are ["Learning", "api usage", "Gossip"].)");
    CHECK(parsed.intents == IntentSet{IntentKind::Learning, IntentKind::ApiUsage});
    CHECK(parsed.dropped_items == 1);
    CHECK_THROWS_AS(parse_intent_response(R"(["Gossip"])"), ResponseParseError);
    CHECK_THROWS_AS(parse_intent_response("none"), ResponseParseError);
  }

  TEST_CASE("resolution responses") {
    CHECK(parse_resolution_response(R"(["Resolved"])") == ResolutionStatus::Resolved);
    CHECK(parse_resolution_response("Answer: [\"unresolved\"]") == ResolutionStatus::Unresolved);
    CHECK_THROWS_AS(parse_resolution_response(R"(["Resolved", "Unresolved"])"), ResponseParseError);
    CHECK_THROWS_AS(parse_resolution_response(R"(["Maybe"])"), ResponseParseError);
  }

  TEST_CASE("baseline responses") {
    const auto yes = parse_baseline_response(R"({"resolution_status": "Yes", "confidence_score": "82%"})");
    CHECK(yes.likely_resolved);
    CHECK(yes.confidence == doctest::Approx(0.82));
    CHECK(yes.resolved_score() == doctest::Approx(0.82));
    const auto no = parse_baseline_response(R"(Result: {"resolution_status": "no", "confidence_score": 70})");
    CHECK_FALSE(no.likely_resolved);
    CHECK(no.resolved_score() == doctest::Approx(0.30));
    CHECK_THROWS_AS(parse_baseline_response(R"({"resolution_status": "Yes", "confidence_score": "120%"})"),
                    ResponseParseError);
    CHECK_THROWS_AS(parse_baseline_response(R"({"resolution_status": "Perhaps", "confidence_score": "50%"})"),
                    ResponseParseError);
    CHECK_THROWS_AS(parse_baseline_response("no json"), ResponseParseError);
  }

  TEST_CASE("JSON extraction skips unbalanced and invalid candidates") {
    CHECK(extract_json_array("[oops ] then [\"a\", \"]\"]") == std::optional<std::string>("[\"a\", \"]\"]"));
    CHECK_FALSE(extract_json_array("[[["));
    CHECK(extract_json_object("x {\"a\": {\"b\": 1}} y") == std::optional<std::string>("{\"a\": {\"b\": 1}}"));
  }
}

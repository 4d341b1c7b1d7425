#include <doctest.h>

#include "devchat/timestamp.hpp"

using namespace devchat;

TEST_SUITE("timestamp") {
  TEST_CASE("naive timestamps are read as UTC") {
    const auto parsed = parse_timestamp("2020-05-03T08:14:12.575000");
    REQUIRE(parsed);
    CHECK(parsed->assumed_utc);
    CHECK(format_timestamp(parsed->value) == "2020-05-03T08:14:12.575000Z");
    CHECK(parsed->value.weekday() == 6);  // a Sunday
    CHECK(parsed->value.hour() == 8);
  }

  TEST_CASE("offsets shift to UTC") {
    const auto parsed = parse_timestamp("2020-05-03T08:14:12+02:00");
    REQUIRE(parsed);
    CHECK_FALSE(parsed->assumed_utc);
    CHECK(format_timestamp(parsed->value) == "2020-05-03T06:14:12.000000Z");
    const auto z = parse_timestamp("2020-05-03 08:14:12Z");
    REQUIRE(z);
    CHECK(z->value.hour() == 8);
  }

  TEST_CASE("malformed text is rejected") {
    for (const char* bad : {"", "yesterday", "2020-13-01T00:00:00", "2020-02-30T00:00:00", "2020-05-03T25:00:00",
                            "2020-05-03T08:14"}) {
      CHECK_FALSE(parse_timestamp(bad));
    }
  }

  TEST_CASE("format then parse round-trips") {
    for (std::int64_t micros : {0LL, 1588493652575000LL, 1700000000123456LL, -86400000000LL}) {
      const auto ts = Timestamp::from_micros(micros);
      const auto back = parse_timestamp(format_timestamp(ts));
      REQUIRE(back);
      CHECK(back->value == ts);
    }
  }

  TEST_CASE("month labels") {
    const auto may = parse_timestamp("2020-05-03T08:14:12")->value;
    const auto jul = parse_timestamp("2020-07-30T08:14:12")->value;
    CHECK(month_label(may) == "May2020");
    CHECK(month_range(may, may) == "May2020");
    CHECK(month_range(may, jul) == "May2020–Jul2020");
  }
}

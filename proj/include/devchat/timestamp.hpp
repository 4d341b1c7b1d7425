#pragma once

#include <chrono>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace devchat {

// A UTC instant with microsecond resolution.
class Timestamp {
 public:
  using Duration = std::chrono::microseconds;
  using TimePoint = std::chrono::sys_time<Duration>;

  constexpr Timestamp() = default;
  constexpr explicit Timestamp(TimePoint tp) : tp_(tp) {}

  static Timestamp from_micros(std::int64_t micros) { return Timestamp(TimePoint(Duration(micros))); }

  std::int64_t micros() const { return tp_.time_since_epoch().count(); }
  TimePoint time_point() const { return tp_; }

  // 0 = Monday ... 6 = Sunday
  int weekday() const;
  int hour() const;
  int year() const;
  // 1..12
  unsigned month() const;

  auto operator<=>(const Timestamp&) const = default;

 private:
  TimePoint tp_{};
};

struct ParsedTimestamp {
  Timestamp value;
  // True when the source carried no UTC offset and UTC was assumed.
  bool assumed_utc = false;
};

// Accepts "YYYY-MM-DDTHH:MM:SS[.ffffff][Z|+HH:MM|-HH:MM]"; a space may
// replace the 'T'. Returns nullopt for anything else.
std::optional<ParsedTimestamp> parse_timestamp(std::string_view text);

// "YYYY-MM-DDTHH:MM:SS.ffffffZ"
std::string format_timestamp(Timestamp ts);

// "Aug2020" for a timestamp in August 2020.
std::string month_label(Timestamp ts);

// "Aug2020–Oct2020" (en dash), or "Aug2020" when both fall in one month.
std::string month_range(Timestamp start, Timestamp end);

}  // namespace devchat

#include "devchat/timestamp.hpp"

#include <array>
#include <charconv>
#include <cstdio>

namespace devchat {

namespace {

using std::chrono::days;
using std::chrono::floor;
using std::chrono::sys_days;
using std::chrono::year_month_day;

constexpr std::array<std::string_view, 12> kMonthAbbrev = {
    "Jan", "Feb", "Mar", "Apr", "May", "Jun", "Jul", "Aug", "Sep", "Oct", "Nov", "Dec"};

bool read_int(std::string_view text, std::size_t pos, std::size_t width, int& out) {
  if (pos + width > text.size()) return false;
  for (std::size_t i = pos; i < pos + width; ++i) {
    if (text[i] < '0' || text[i] > '9') return false;
  }
  auto [ptr, ec] = std::from_chars(text.data() + pos, text.data() + pos + width, out);
  return ec == std::errc() && ptr == text.data() + pos + width;
}

year_month_day civil_date(Timestamp ts) {
  return year_month_day{floor<days>(ts.time_point())};
}

}  // namespace

int Timestamp::weekday() const {
  const std::chrono::weekday wd{floor<days>(tp_)};
  // iso_encoding: Monday = 1 ... Sunday = 7
  return static_cast<int>(wd.iso_encoding()) - 1;
}

int Timestamp::hour() const {
  const auto since_midnight = tp_ - floor<days>(tp_);
  return static_cast<int>(std::chrono::duration_cast<std::chrono::hours>(since_midnight).count());
}

int Timestamp::year() const { return static_cast<int>(civil_date(*this).year()); }

unsigned Timestamp::month() const { return static_cast<unsigned>(civil_date(*this).month()); }

std::optional<ParsedTimestamp> parse_timestamp(std::string_view text) {
  int y = 0, mo = 0, d = 0, h = 0, mi = 0, s = 0;
  if (!read_int(text, 0, 4, y) || text.size() < 19 || text[4] != '-' || !read_int(text, 5, 2, mo) ||
      text[7] != '-' || !read_int(text, 8, 2, d) || (text[10] != 'T' && text[10] != ' ') ||
      !read_int(text, 11, 2, h) || text[13] != ':' || !read_int(text, 14, 2, mi) || text[16] != ':' ||
      !read_int(text, 17, 2, s)) {
    return std::nullopt;
  }
  if (h > 23 || mi > 59 || s > 60) return std::nullopt;
  const year_month_day date{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(mo)},
                            std::chrono::day{static_cast<unsigned>(d)}};
  if (!date.ok()) return std::nullopt;

  std::size_t pos = 19;
  std::int64_t micros = 0;
  if (pos < text.size() && text[pos] == '.') {
    ++pos;
    std::size_t digits = 0;
    while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') {
      if (digits < 6) micros = micros * 10 + (text[pos] - '0');
      ++digits;
      ++pos;
    }
    if (digits == 0) return std::nullopt;
    for (std::size_t k = digits; k < 6; ++k) micros *= 10;
  }

  ParsedTimestamp parsed;
  std::int64_t offset_minutes = 0;
  if (pos == text.size()) {
    parsed.assumed_utc = true;
  } else if (text[pos] == 'Z' || text[pos] == 'z') {
    ++pos;
  } else if (text[pos] == '+' || text[pos] == '-') {
    const int sign = text[pos] == '-' ? -1 : 1;
    int oh = 0, om = 0;
    if (!read_int(text, pos + 1, 2, oh)) return std::nullopt;
    std::size_t next = pos + 3;
    if (next < text.size() && text[next] == ':') ++next;
    if (!read_int(text, next, 2, om)) return std::nullopt;
    pos = next + 2;
    offset_minutes = sign * (oh * 60 + om);
  } else {
    return std::nullopt;
  }
  if (pos != text.size()) return std::nullopt;

  const auto tp = sys_days{date} + std::chrono::hours{h} + std::chrono::minutes{mi} +
                  std::chrono::seconds{s} + std::chrono::microseconds{micros} -
                  std::chrono::minutes{offset_minutes};
  parsed.value = Timestamp(std::chrono::time_point_cast<Timestamp::Duration>(tp));
  return parsed;
}

std::string format_timestamp(Timestamp ts) {
  const auto day_start = floor<days>(ts.time_point());
  const year_month_day date{day_start};
  const std::int64_t micros_of_day = (ts.time_point() - day_start).count();
  const auto secs = static_cast<unsigned>(micros_of_day / 1'000'000);
  const auto fraction = static_cast<unsigned>(micros_of_day % 1'000'000);
  char buf[40];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02u:%02u:%02u.%06uZ",
                static_cast<int>(date.year()), static_cast<unsigned>(date.month()),
                static_cast<unsigned>(date.day()), secs / 3600 % 24U, secs / 60 % 60U, secs % 60U,
                fraction % 1'000'000U);
  return buf;
}

std::string month_label(Timestamp ts) {
  return std::string(kMonthAbbrev[ts.month() - 1]) + std::to_string(ts.year());
}

std::string month_range(Timestamp start, Timestamp end) {
  const std::string first = month_label(start);
  const std::string last = month_label(end);
  if (first == last) return first;
  return first + "–" + last;
}

}  // namespace devchat

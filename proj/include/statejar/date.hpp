// statejar: HTTP date handling for the Expires cookie attribute.
//
// Accepts the three classic wire formats and always computes in UTC:
//   RFC 1123   Sun, 27 Apr 1997 01:16:23 GMT
//   RFC 850    Sunday, 27-Apr-97 01:16:23 GMT
//   asctime    Sun Apr 27 01:16:23 1997
// Output is always RFC 1123.
#pragma once

#include <array>
#include <cctype>
#include <cstdint>
#include <cstdio>
#include <string>
#include <string_view>

#include "statejar/result.hpp"

namespace statejar {

namespace detail {

inline constexpr std::array<std::string_view, 7> kWeekdaysShort = {
    "Sun", "Mon", "Tue", "Wed", "Thu", "Fri", "Sat"};
inline constexpr std::array<std::string_view, 7> kWeekdaysLong = {
    "Sunday", "Monday",   "Tuesday", "Wednesday",
    "Thursday", "Friday", "Saturday"};
inline constexpr std::array<std::string_view, 12> kMonths = {
    "Jan", "Feb", "Mar", "Apr", "May", "Jun",
    "Jul", "Aug", "Sep", "Oct", "Nov", "Dec"};

inline bool ieq(std::string_view a, std::string_view b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(a[i])) !=
        std::tolower(static_cast<unsigned char>(b[i]))) {
      return false;
    }
  }
  return true;
}

// Days since 1970-01-01 for a proleptic Gregorian civil date.
inline std::int64_t days_from_civil(std::int64_t y, int m, int d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy =
      static_cast<unsigned>((153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1);
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

inline void civil_from_days(std::int64_t z, std::int64_t& y, int& m, int& d) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  y = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
  m = static_cast<int>(mp + (mp < 10 ? 3 : -9));
  y += (m <= 2);
}

inline bool is_leap(std::int64_t y) {
  return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
}

inline int days_in_month(std::int64_t y, int m) {
  static constexpr int kLen[12] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  if (m == 2 && is_leap(y)) return 29;
  return kLen[m - 1];
}

inline int month_from_name(std::string_view word) {
  for (std::size_t i = 0; i < kMonths.size(); ++i) {
    if (ieq(word, kMonths[i])) return static_cast<int>(i) + 1;
  }
  return 0;
}

inline bool weekday_name_valid(std::string_view word) {
  for (auto w : kWeekdaysShort) {
    if (ieq(word, w)) return true;
  }
  for (auto w : kWeekdaysLong) {
    if (ieq(word, w)) return true;
  }
  return false;
}

inline bool parse_fixed_int(std::string_view s, int& out) {
  if (s.empty() || s.size() > 9) return false;
  int v = 0;
  for (char c : s) {
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
    v = v * 10 + (c - '0');
  }
  out = v;
  return true;
}

// Splits on spaces, collapsing runs (asctime pads single-digit days).
inline std::size_t split_words(std::string_view s, std::array<std::string_view, 8>& out) {
  std::size_t n = 0;
  std::size_t i = 0;
  while (i < s.size() && n < out.size()) {
    while (i < s.size() && s[i] == ' ') ++i;
    if (i >= s.size()) break;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ') ++j;
    out[n++] = s.substr(i, j - i);
    i = j;
  }
  while (i < s.size() && s[i] == ' ') ++i;
  return i >= s.size() ? n : out.size() + 1;  // too many words -> sentinel
}

inline bool parse_hms(std::string_view s, int& hh, int& mm, int& ss) {
  if (s.size() != 8 || s[2] != ':' || s[5] != ':') return false;
  return parse_fixed_int(s.substr(0, 2), hh) && parse_fixed_int(s.substr(3, 2), mm) &&
         parse_fixed_int(s.substr(6, 2), ss) && hh < 24 && mm < 60 && ss < 60;
}

}  // namespace detail

// Parses one of the three accepted formats into UTC seconds since the epoch.
inline Result<std::int64_t> parse_http_date(std::string_view text) {
  using namespace detail;
  // Trim outer whitespace.
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t')) text.remove_suffix(1);

  const auto fail = [&](const char* why) {
    return Result<std::int64_t>(make_error(ErrorClass::BadDate, std::string(why) + ": '" + std::string(text) + "'"));
  };

  std::int64_t year = 0;
  int mon = 0, day = 0, hh = 0, mm = 0, ss = 0;

  const auto comma = text.find(',');
  if (comma != std::string_view::npos) {
    std::string_view wd = text.substr(0, comma);
    if (!weekday_name_valid(wd)) return fail("unrecognized weekday");
    std::string_view rest = text.substr(comma + 1);
    std::array<std::string_view, 8> w{};
    const std::size_t n = split_words(rest, w);
    if (n == 5 && ieq(w[4], "GMT")) {
      if (wd.size() == 3) {
        // RFC 1123: dd Mon yyyy hh:mm:ss GMT
        int y4 = 0;
        if (!parse_fixed_int(w[0], day) || w[0].size() != 2) return fail("bad day");
        mon = month_from_name(w[1]);
        if (mon == 0) return fail("bad month");
        if (!parse_fixed_int(w[2], y4) || w[2].size() != 4) return fail("bad year");
        year = y4;
        if (!parse_hms(w[3], hh, mm, ss)) return fail("bad time");
      } else {
        return fail("weekday form mismatch");
      }
    } else if (n == 3 && ieq(w[2], "GMT")) {
      // RFC 850: Weekday, dd-Mon-yy hh:mm:ss GMT
      std::string_view dmy = w[0];
      if (dmy.size() != 9 || dmy[2] != '-' || dmy[6] != '-') return fail("bad date field");
      int y2 = 0;
      if (!parse_fixed_int(dmy.substr(0, 2), day)) return fail("bad day");
      mon = month_from_name(dmy.substr(3, 3));
      if (mon == 0) return fail("bad month");
      if (!parse_fixed_int(dmy.substr(7, 2), y2)) return fail("bad year");
      // Two-digit years: 70-99 are 19xx, 00-69 are 20xx.
      year = y2 >= 70 ? 1900 + y2 : 2000 + y2;
      if (!parse_hms(w[1], hh, mm, ss)) return fail("bad time");
    } else {
      return fail("unrecognized format");
    }
  } else {
    // asctime: Wkd Mon (d)d hh:mm:ss yyyy
    std::array<std::string_view, 8> w{};
    const std::size_t n = split_words(text, w);
    if (n != 5) return fail("unrecognized format");
    if (!weekday_name_valid(w[0]) || w[0].size() != 3) return fail("unrecognized weekday");
    mon = month_from_name(w[1]);
    if (mon == 0) return fail("bad month");
    if (!parse_fixed_int(w[2], day) || w[2].size() > 2) return fail("bad day");
    if (!parse_hms(w[3], hh, mm, ss)) return fail("bad time");
    int y4 = 0;
    if (!parse_fixed_int(w[4], y4) || w[4].size() != 4) return fail("bad year");
    year = y4;
  }

  if (mon < 1 || mon > 12) return fail("bad month");
  if (day < 1 || day > days_in_month(year, mon)) return fail("impossible calendar date");
  if (year < 1601) return fail("year out of range");

  const std::int64_t days = days_from_civil(year, mon, day);
  return days * 86400 + hh * 3600 + mm * 60 + ss;
}

// RFC 1123 rendering, e.g. "Sun, 27 Apr 1997 01:16:23 GMT".
inline std::string format_http_date(std::int64_t utc_seconds) {
  using namespace detail;
  std::int64_t days = utc_seconds / 86400;
  std::int64_t rem = utc_seconds % 86400;
  if (rem < 0) {
    rem += 86400;
    days -= 1;
  }
  std::int64_t y = 0;
  int m = 0, d = 0;
  civil_from_days(days, y, m, d);
  const int wd = static_cast<int>(((days % 7) + 11) % 7);  // 1970-01-01 is a Thursday
  const int hh = static_cast<int>(rem / 3600);
  const int mm = static_cast<int>((rem % 3600) / 60);
  const int ss = static_cast<int>(rem % 60);
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%s, %02d %s %04d %02d:%02d:%02d GMT",
                std::string(kWeekdaysShort[static_cast<std::size_t>(wd)]).c_str(), d,
                std::string(kMonths[static_cast<std::size_t>(m - 1)]).c_str(),
                static_cast<int>(y), hh, mm, ss);
  return buf;
}

}  // namespace statejar

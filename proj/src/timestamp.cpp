#include "zonalclim/timestamp.hpp"

#include <charconv>
#include <chrono>
#include <cstdio>

#include "zonalclim/error.hpp"

namespace zonalclim {

std::string_view to_string(Frequency f) {
  switch (f) {
    case Frequency::daily:
      return "daily";
    case Frequency::monthly:
      return "monthly";
    case Frequency::annual:
      return "annual";
  }
  return "?";
}

Frequency parse_frequency(std::string_view s) {
  if (s == "daily") return Frequency::daily;
  if (s == "monthly") return Frequency::monthly;
  if (s == "annual") return Frequency::annual;
  throw ValidationError("unknown frequency '" + std::string(s) + "'");
}

namespace {

int parse_field(std::string_view s, std::size_t width, std::string_view whole) {
  int v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.size() != width || ec != std::errc{} || p != s.data() + s.size())
    throw ValidationError("malformed timestamp '" + std::string(whole) + "'");
  return v;
}

}  // namespace

Timestamp Timestamp::parse(std::string_view s) {
  Timestamp t;
  t.year = parse_field(s.substr(0, 4), 4, s);
  if (s.size() > 4) {
    if (s[4] != '-') throw ValidationError("malformed timestamp '" + std::string(s) + "'");
    t.month = parse_field(s.substr(5, 2), 2, s);
    if (t.month < 1 || t.month > 12)
      throw ValidationError("month out of range in '" + std::string(s) + "'");
  }
  if (s.size() > 7) {
    if (s[7] != '-') throw ValidationError("malformed timestamp '" + std::string(s) + "'");
    t.day = parse_field(s.substr(8), 2, s);
    if (t.day < 1 || t.day > days_in_month(t.year, t.month))
      throw ValidationError("day out of range in '" + std::string(s) + "'");
  }
  return t;
}

Frequency Timestamp::precision() const noexcept {
  if (day != 0) return Frequency::daily;
  if (month != 0) return Frequency::monthly;
  return Frequency::annual;
}

Timestamp Timestamp::truncate(Frequency f) const {
  if (static_cast<int>(f) < static_cast<int>(precision()))
    throw FrequencyError("cannot refine " + str() + " to " + std::string(to_string(f)));
  switch (f) {
    case Frequency::daily:
      return *this;
    case Frequency::monthly:
      return {year, month, 0};
    case Frequency::annual:
      return {year, 0, 0};
  }
  return *this;
}

std::string Timestamp::str() const {
  char buf[16];
  if (day != 0)
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", year, month, day);
  else if (month != 0)
    std::snprintf(buf, sizeof buf, "%04d-%02d", year, month);
  else
    std::snprintf(buf, sizeof buf, "%04d", year);
  return buf;
}

int days_in_month(int year, int month) {
  using namespace std::chrono;
  const year_month_day_last last{std::chrono::year{year} / std::chrono::month{static_cast<unsigned>(month)} / std::chrono::last};
  return static_cast<int>(static_cast<unsigned>(last.day()));
}

}  // namespace zonalclim

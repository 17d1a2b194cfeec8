#pragma once

#include <compare>
#include <string>
#include <string_view>

namespace zonalclim {

enum class Frequency { daily, monthly, annual };

std::string_view to_string(Frequency f);
Frequency parse_frequency(std::string_view s);

/// Calendar token at day, month or year precision. Unused finer fields are
/// zero, so "2015" is {2015, 0, 0} and "2015-03" is {2015, 3, 0}.
struct Timestamp {
  int year = 0;
  int month = 0;
  int day = 0;

  static Timestamp parse(std::string_view s);

  /// The frequency whose natural token has this precision.
  Frequency precision() const noexcept;

  /// Truncate to a coarser token; requesting a finer precision is an error.
  Timestamp truncate(Frequency f) const;

  std::string str() const;

  auto operator<=>(const Timestamp&) const = default;
};

int days_in_month(int year, int month);

}  // namespace zonalclim

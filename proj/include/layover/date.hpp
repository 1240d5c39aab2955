#pragma once

#include <compare>
#include <string>
#include <string_view>

namespace layover {

/// Proleptic Gregorian calendar date, stored as days since 1970-01-01.
class Date {
 public:
  constexpr Date() = default;
  static Date from_ymd(int year, unsigned month, unsigned day);
  /// Parses YYYY-MM-DD; throws ParseError otherwise.
  static Date parse(std::string_view text);

  int year() const;
  unsigned month() const;
  unsigned day() const;
  long days_since_epoch() const { return days_; }
  std::string iso() const;
  /// Compact form used in file names (YYYYMMDD).
  std::string compact() const;

  friend long operator-(Date a, Date b) { return a.days_ - b.days_; }
  friend Date operator+(Date a, long days) { return Date(a.days_ + days); }
  friend auto operator<=>(Date, Date) = default;

 private:
  explicit constexpr Date(long days) : days_(days) {}
  long days_ = 0;
};

}  // namespace layover

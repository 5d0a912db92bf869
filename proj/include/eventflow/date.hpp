#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace eventflow {

// A proleptic Gregorian calendar day, stored as days since 1970-01-01.
class Date {
 public:
  constexpr Date() = default;
  constexpr explicit Date(std::int64_t days_since_epoch) : days_(days_since_epoch) {}

  static Date from_ymd(int year, unsigned month, unsigned day);

  // Strict ISO-8601 "YYYY-MM-DD". Returns nullopt on any malformation,
  // including impossible days such as 1970-02-30.
  static std::optional<Date> parse(std::string_view text);

  // Throws DomainError on malformed input.
  static Date parse_or_throw(std::string_view text);

  constexpr std::int64_t days() const noexcept { return days_; }

  int year() const;
  unsigned month() const;
  unsigned day() const;
  // 0 = Sunday ... 6 = Saturday
  unsigned weekday() const;

  std::string iso() const;

  constexpr Date operator+(std::int64_t n) const noexcept { return Date(days_ + n); }
  constexpr Date operator-(std::int64_t n) const noexcept { return Date(days_ - n); }
  constexpr std::int64_t operator-(Date other) const noexcept { return days_ - other.days_; }

  constexpr auto operator<=>(const Date&) const = default;

 private:
  std::int64_t days_ = 0;
};

}  // namespace eventflow

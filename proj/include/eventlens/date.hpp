#pragma once

#include <chrono>
#include <compare>
#include <optional>
#include <string>
#include <string_view>

namespace eventlens {

/// Calendar date with ISO-8601 (YYYY-MM-DD) text form.
class Date {
 public:
  constexpr Date() = default;
  explicit constexpr Date(std::chrono::sys_days days) : days_(days) {}

  /// Returns nullopt unless `text` is exactly YYYY-MM-DD naming a valid day.
  static std::optional<Date> parse(std::string_view text);

  /// Parses or throws ParseError.
  static Date from_iso(std::string_view text);

  std::string iso() const;
  std::chrono::sys_days days() const { return days_; }
  Date plus_days(int n) const { return Date(days_ + std::chrono::days(n)); }
  bool is_weekend() const;

  friend constexpr auto operator<=>(const Date&, const Date&) = default;

 private:
  std::chrono::sys_days days_{};
};

}  // namespace eventlens

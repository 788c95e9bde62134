#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace gapmark {

/// Length of time in microseconds.
struct Duration {
  std::int64_t micros = 0;

  static constexpr Duration from_seconds(double seconds);
  constexpr double seconds() const { return static_cast<double>(micros) / 1e6; }

  friend constexpr auto operator<=>(Duration, Duration) = default;
};

constexpr Duration Duration::from_seconds(double seconds) {
  const double scaled = seconds * 1e6;
  return Duration{static_cast<std::int64_t>(scaled < 0 ? scaled - 0.5 : scaled + 0.5)};
}

/// Absolute instant, microseconds since 1970-01-01 00:00:00 (no time zone).
struct Timestamp {
  std::int64_t micros = 0;

  friend constexpr auto operator<=>(Timestamp, Timestamp) = default;
  friend constexpr Timestamp operator+(Timestamp t, Duration d) { return {t.micros + d.micros}; }
  friend constexpr Duration operator-(Timestamp a, Timestamp b) { return {a.micros - b.micros}; }
};

inline constexpr std::int64_t kMicrosPerDay = 86'400'000'000;

/// Days since epoch; instants before the epoch floor toward negative infinity.
constexpr std::int64_t day_index(Timestamp t) {
  return t.micros >= 0 ? t.micros / kMicrosPerDay : -((-t.micros + kMicrosPerDay - 1) / kMicrosPerDay);
}

/// Parses "YYYY-MM-DD" and "HH:MM:SS[.f{1,6}]" fields.
std::optional<Timestamp> parse_timestamp(std::string_view date, std::string_view time);

/// "YYYY-MM-DD HH:MM:SS" plus ".ffffff" when the sub-second part is nonzero.
std::string format_timestamp(Timestamp t);

}  // namespace gapmark

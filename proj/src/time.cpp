#include "gapmark/time.hpp"

#include <charconv>
#include <chrono>

#include <fmt/format.h>

namespace gapmark {
namespace {

bool parse_digits(std::string_view text, int& out) {
  if (text.empty()) return false;
  for (char c : text)
    if (c < '0' || c > '9') return false;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc{} && ptr == text.data() + text.size();
}

}  // namespace

std::optional<Timestamp> parse_timestamp(std::string_view date, std::string_view time) {
  using namespace std::chrono;
  if (date.size() != 10 || date[4] != '-' || date[7] != '-') return std::nullopt;
  int y = 0, mo = 0, d = 0;
  if (!parse_digits(date.substr(0, 4), y) || !parse_digits(date.substr(5, 2), mo) ||
      !parse_digits(date.substr(8, 2), d))
    return std::nullopt;
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) return std::nullopt;

  if (time.size() < 8 || time[2] != ':' || time[5] != ':') return std::nullopt;
  int h = 0, mi = 0, s = 0;
  if (!parse_digits(time.substr(0, 2), h) || !parse_digits(time.substr(3, 2), mi) ||
      !parse_digits(time.substr(6, 2), s))
    return std::nullopt;
  if (h > 23 || mi > 59 || s > 59) return std::nullopt;

  std::int64_t frac = 0;
  if (time.size() > 8) {
    if (time[8] != '.') return std::nullopt;
    const auto digits = time.substr(9);
    if (digits.empty() || digits.size() > 6) return std::nullopt;
    int value = 0;
    if (!parse_digits(digits, value)) return std::nullopt;
    frac = value;
    for (std::size_t i = digits.size(); i < 6; ++i) frac *= 10;
  }

  const std::int64_t days = sys_days{ymd}.time_since_epoch().count();
  const std::int64_t secs = days * 86'400 + h * 3600 + mi * 60 + s;
  return Timestamp{secs * 1'000'000 + frac};
}

std::string format_timestamp(Timestamp t) {
  using namespace std::chrono;
  const std::int64_t day = day_index(t);
  const std::int64_t in_day = t.micros - day * kMicrosPerDay;
  const year_month_day ymd{sys_days{days{day}}};
  const std::int64_t secs = in_day / 1'000'000;
  const std::int64_t frac = in_day % 1'000'000;
  std::string out = fmt::format("{:04d}-{:02d}-{:02d} {:02d}:{:02d}:{:02d}", static_cast<int>(ymd.year()),
                                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()), secs / 3600,
                                (secs / 60) % 60, secs % 60);
  if (frac != 0) out += fmt::format(".{:06d}", frac);
  return out;
}

}  // namespace gapmark

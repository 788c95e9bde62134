#include "gapmark/sampling.hpp"

#include <algorithm>
#include <charconv>

#include <fmt/format.h>

#include "gapmark/error.hpp"

namespace gapmark {

SensorMap SensorMap::from_stream(const EventStream& stream) {
  if (stream.events.empty()) throw Error(ErrorCode::EmptyStream, "cannot build a sensor map from an empty stream");
  SensorMap map;
  for (const auto& event : stream.events) {
    if (map.index_.contains(event.sensor_id)) continue;
    map.index_.emplace(event.sensor_id, map.ids_.size());
    map.ids_.push_back(event.sensor_id);
  }
  if (map.size() > kMaxSensors)
    throw Error(ErrorCode::TooManySensors, fmt::format("{} sensors exceed the {}-bit code width", map.size(), kMaxSensors));
  return map;
}

SensorMap SensorMap::from_ids(const std::vector<std::string>& ids) {
  SensorMap map;
  for (const auto& id : ids) {
    if (map.index_.contains(id)) continue;
    map.index_.emplace(id, map.ids_.size());
    map.ids_.push_back(id);
  }
  if (map.size() > kMaxSensors)
    throw Error(ErrorCode::TooManySensors, fmt::format("{} sensors exceed the {}-bit code width", map.size(), kMaxSensors));
  return map;
}

std::optional<std::size_t> SensorMap::index_of(std::string_view sensor_id) const {
  const auto it = index_.find(std::string(sensor_id));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::string code_hex(ObservationCode code, std::size_t sensor_count) {
  const std::size_t width = std::max<std::size_t>(1, (sensor_count + 3) / 4);
  return fmt::format("0x{:0{}X}", code.bits, width);
}

std::optional<ObservationCode> parse_code_hex(std::string_view text) {
  if (text.size() < 3 || text[0] != '0' || (text[1] != 'x' && text[1] != 'X')) return std::nullopt;
  const auto digits = text.substr(2);
  if (digits.size() > 16) return std::nullopt;
  std::uint64_t bits = 0;
  auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), bits, 16);
  if (ec != std::errc{} || ptr != digits.data() + digits.size()) return std::nullopt;
  return ObservationCode{bits};
}

void SampleSeries::refresh_alphabet() {
  alphabet.clear();
  alphabet.reserve(64);
  for (const auto& s : samples) alphabet.push_back(s.code);
  std::sort(alphabet.begin(), alphabet.end());
  alphabet.erase(std::unique(alphabet.begin(), alphabet.end()), alphabet.end());
}

std::vector<ObservationCode> SampleSeries::codes() const {
  std::vector<ObservationCode> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(s.code);
  return out;
}

std::vector<Label> SampleSeries::labels() const {
  std::vector<Label> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(s.label);
  return out;
}

std::size_t SampleSeries::null_count() const {
  return static_cast<std::size_t>(
      std::count_if(samples.begin(), samples.end(), [](const LabeledSample& s) { return !s.label; }));
}

SampleSeries resample(const EventStream& stream, const SensorMap& map, Duration delta_t, LatchMode mode) {
  if (delta_t.micros <= 0)
    throw Error(ErrorCode::NonPositiveInterval, fmt::format("delta_t must be positive, got {} us", delta_t.micros));
  if (stream.events.empty()) throw Error(ErrorCode::EmptyStream, "nothing to resample");

  const Timestamp first = stream.events.front().time;
  const Timestamp last = stream.events.back().time;
  const std::int64_t ticks = (last - first).micros / delta_t.micros + 1;

  SampleSeries series;
  series.delta_t = delta_t;
  series.sensor_count = map.size();
  series.samples.reserve(static_cast<std::size_t>(ticks));

  std::uint64_t latched = 0;
  std::uint64_t pulsed = 0;
  std::size_t next = 0;
  const auto& events = stream.events;
  for (std::int64_t k = 0; k < ticks; ++k) {
    const Timestamp tick = first + Duration{k * delta_t.micros};
    for (; next < events.size() && events[next].time <= tick; ++next) {
      const auto bit = map.index_of(events[next].sensor_id);
      if (!bit) throw Error(ErrorCode::InvalidConfig, fmt::format("sensor '{}' missing from sensor map", events[next].sensor_id));
      const std::uint64_t mask = std::uint64_t{1} << *bit;
      if (events[next].value == SensorValue::Active) {
        latched |= mask;
        pulsed |= mask;
      } else {
        latched &= ~mask;
      }
    }
    const std::uint64_t bits = mode == LatchMode::Latch ? latched : pulsed;
    series.samples.push_back({tick, ObservationCode{bits}, std::nullopt});
    pulsed = 0;
  }
  series.refresh_alphabet();
  return series;
}

SampleSeries assign_labels(SampleSeries series, const std::vector<AnnotationInterval>& intervals) {
  std::vector<const AnnotationInterval*> sorted;
  sorted.reserve(intervals.size());
  for (const auto& interval : intervals) sorted.push_back(&interval);
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const AnnotationInterval* a, const AnnotationInterval* b) { return a->start < b->start; });
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    if (sorted[i]->start < sorted[i - 1]->end)
      throw Error(ErrorCode::OverlappingIntervals,
                  fmt::format("{} [{}, {}) overlaps {} [{}, {})", sorted[i - 1]->activity,
                              format_timestamp(sorted[i - 1]->start), format_timestamp(sorted[i - 1]->end),
                              sorted[i]->activity, format_timestamp(sorted[i]->start),
                              format_timestamp(sorted[i]->end)));
  }

  std::size_t cursor = 0;
  for (auto& sample : series.samples) {
    while (cursor < sorted.size() && sorted[cursor]->end <= sample.time) ++cursor;
    if (cursor < sorted.size() && sorted[cursor]->start <= sample.time)
      sample.label = sorted[cursor]->activity;
    else
      sample.label.reset();
  }
  return series;
}

DeltaTRange recommend_delta_t(const EventStream& stream) {
  const auto n = stream.events.size();
  if (n < 2) throw Error(ErrorCode::TooFewEvents, fmt::format("need at least 2 events, got {}", n));
  // Mean of consecutive gaps telescopes to span / (n - 1); keep the products
  // integral so 50% and 65% come out as correctly rounded quotients.
  const std::int64_t span = (stream.events.back().time - stream.events.front().time).micros;
  const double denom = 100.0 * static_cast<double>(n - 1) * 1e6;
  return DeltaTRange{static_cast<double>(span * 50) / denom, static_cast<double>(span * 65) / denom};
}

std::pair<SampleSeries, SampleSeries> chronological_split(const SampleSeries& series, double train_fraction) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw Error(ErrorCode::InvalidFraction, fmt::format("train fraction must lie in (0, 1), got {}", train_fraction));
  if (series.samples.empty()) throw Error(ErrorCode::EmptySeries, "cannot split an empty series");

  const auto cut = static_cast<std::size_t>(static_cast<double>(series.samples.size()) * train_fraction);
  SampleSeries train{series.delta_t, series.sensor_count, {}, {}};
  SampleSeries test{series.delta_t, series.sensor_count, {}, {}};
  train.samples.assign(series.samples.begin(), series.samples.begin() + static_cast<std::ptrdiff_t>(cut));
  test.samples.assign(series.samples.begin() + static_cast<std::ptrdiff_t>(cut), series.samples.end());
  train.refresh_alphabet();
  test.refresh_alphabet();
  return {std::move(train), std::move(test)};
}

std::string series_to_csv(const SampleSeries& series) {
  std::string out = "timestamp,code_hex,label\n";
  out.reserve(series.samples.size() * 48);
  for (const auto& s : series.samples) {
    out += format_timestamp(s.time);
    out += ',';
    out += code_hex(s.code, series.sensor_count);
    out += ',';
    if (s.label)
      out += *s.label;
    else
      out += kNullToken;
    out += '\n';
  }
  return out;
}

SampleSeries series_from_csv(std::string_view text, std::optional<Duration> delta_t) {
  SampleSeries series;
  std::size_t pos = 0;
  std::size_t line_number = 0;
  std::size_t hex_digits = 0;
  bool header_seen = false;
  while (pos < text.size()) {
    auto eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    auto line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    if (!header_seen) {
      if (line != "timestamp,code_hex,label")
        throw Error(ErrorCode::MalformedSeries, "missing header 'timestamp,code_hex,label'");
      header_seen = true;
      continue;
    }
    const auto c1 = line.find(',');
    const auto c2 = c1 == std::string_view::npos ? c1 : line.find(',', c1 + 1);
    if (c2 == std::string_view::npos)
      throw Error(ErrorCode::MalformedSeries, fmt::format("line {}: expected 3 columns", line_number));
    const auto stamp = line.substr(0, c1);
    const auto space = stamp.find(' ');
    const auto time = space == std::string_view::npos
                          ? std::nullopt
                          : parse_timestamp(stamp.substr(0, space), stamp.substr(space + 1));
    const auto hex = line.substr(c1 + 1, c2 - c1 - 1);
    const auto code = parse_code_hex(hex);
    if (!time || !code) throw Error(ErrorCode::MalformedSeries, fmt::format("line {}: bad timestamp or code", line_number));
    hex_digits = std::max(hex_digits, hex.size() - 2);
    const auto label = line.substr(c2 + 1);
    series.samples.push_back(
        {*time, *code, label == kNullToken ? Label{} : Label{std::string(label)}});
  }
  if (!header_seen) throw Error(ErrorCode::MalformedSeries, "missing header 'timestamp,code_hex,label'");
  series.sensor_count = hex_digits * 4;
  if (delta_t) {
    series.delta_t = *delta_t;
  } else if (series.samples.size() >= 2) {
    series.delta_t = series.samples[1].time - series.samples[0].time;
  }
  series.refresh_alphabet();
  return series;
}

}  // namespace gapmark

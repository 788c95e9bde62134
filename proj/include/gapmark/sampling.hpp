#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "gapmark/events.hpp"

namespace gapmark {

inline constexpr std::size_t kMaxSensors = 64;

/// Sensor id -> bit position, assigned in order of first appearance.
class SensorMap {
 public:
  static SensorMap from_stream(const EventStream& stream);
  static SensorMap from_ids(const std::vector<std::string>& ids);

  std::optional<std::size_t> index_of(std::string_view sensor_id) const;
  std::size_t size() const { return ids_.size(); }
  const std::vector<std::string>& ids() const { return ids_; }

 private:
  std::vector<std::string> ids_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Latched sensor states at one tick; bit i is sensor i of the SensorMap.
struct ObservationCode {
  std::uint64_t bits = 0;

  friend constexpr auto operator<=>(ObservationCode, ObservationCode) = default;
};

/// "0x" followed by ceil(sensor_count / 4) zero-padded upper-case hex digits.
std::string code_hex(ObservationCode code, std::size_t sensor_count);
std::optional<ObservationCode> parse_code_hex(std::string_view text);

/// nullopt is an annotation gap.
using Label = std::optional<std::string>;

struct LabeledSample {
  Timestamp time;
  ObservationCode code;
  Label label;

  friend bool operator==(const LabeledSample&, const LabeledSample&) = default;
};

struct SampleSeries {
  Duration delta_t;
  std::size_t sensor_count = 0;
  std::vector<LabeledSample> samples;
  std::vector<ObservationCode> alphabet;  // sorted, distinct codes present in samples

  /// Recomputes `alphabet` from `samples`.
  void refresh_alphabet();
  std::vector<ObservationCode> codes() const;
  std::vector<Label> labels() const;
  std::size_t size() const { return samples.size(); }
  std::size_t null_count() const;

  friend bool operator==(const SampleSeries&, const SampleSeries&) = default;
};

/// How a tick's code is derived from events.
enum class LatchMode {
  Latch,  // each sensor holds its last reported value
  Pulse,  // bit set iff the sensor reported active within (previous tick, tick]
};

SampleSeries resample(const EventStream& stream, const SensorMap& map, Duration delta_t,
                      LatchMode mode = LatchMode::Latch);

/// Labels each sample with the interval containing it, [start, end); Null elsewhere.
SampleSeries assign_labels(SampleSeries series, const std::vector<AnnotationInterval>& intervals);

struct DeltaTRange {
  double low = 0;   // seconds
  double high = 0;  // seconds

  double midpoint() const { return (low + high) / 2; }
};

/// 50% and 65% of the mean inter-event spacing.
DeltaTRange recommend_delta_t(const EventStream& stream);

/// First floor(n * train_fraction) samples train, the rest test.
std::pair<SampleSeries, SampleSeries> chronological_split(const SampleSeries& series, double train_fraction);

/// CSV with header "timestamp,code_hex,label"; Null is written as "∅".
std::string series_to_csv(const SampleSeries& series);

/// Inverse of series_to_csv. delta_t is taken from the first two rows unless
/// given; sensor_count is 4 * hex digits.
SampleSeries series_from_csv(std::string_view text, std::optional<Duration> delta_t = std::nullopt);

inline constexpr std::string_view kNullToken = "\xE2\x88\x85";  // U+2205

}  // namespace gapmark

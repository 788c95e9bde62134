#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gapmark/time.hpp"

namespace gapmark {

enum class SensorValue : unsigned char { Inactive, Active };

enum class Marker : unsigned char { Begin, End };

struct Annotation {
  std::string activity;
  Marker marker = Marker::Begin;

  friend bool operator==(const Annotation&, const Annotation&) = default;
};

// One raw reading. Annotation markers ride on sensor lines, CASAS style:
//   2010-11-04 05:40:51.303739 M004 ON Sleeping begin
struct SensorEvent {
  Timestamp time;
  std::string sensor_id;
  SensorValue value = SensorValue::Inactive;
  std::optional<Annotation> annotation;

  friend bool operator==(const SensorEvent&, const SensorEvent&) = default;
};

struct EventStream {
  std::vector<SensorEvent> events;  // sorted by time, stable w.r.t. input order
  std::string source_digest;        // sha256 of the raw input bytes, hex
  std::size_t skipped_lines = 0;    // malformed lines dropped under MalformedPolicy::Skip
};

struct AnnotationInterval {
  std::string activity;
  Timestamp start;
  Timestamp end;  // exclusive

  friend bool operator==(const AnnotationInterval&, const AnnotationInterval&) = default;
};

/// Token -> binary value normalization. Lookup is case-sensitive.
class ValueTable {
 public:
  /// ON/OPEN -> active, OFF/CLOSE/CLOSED -> inactive.
  static ValueTable defaults();

  void set(std::string token, SensorValue value) { tokens_[std::move(token)] = value; }
  std::optional<SensorValue> lookup(std::string_view token) const;

 private:
  std::map<std::string, SensorValue, std::less<>> tokens_;
};

enum class MalformedPolicy { FailFast, Skip };

struct ParseOptions {
  ValueTable values = ValueTable::defaults();
  MalformedPolicy policy = MalformedPolicy::FailFast;
};

/// Throws Error(MalformedLine) naming `line_number` on bad field count,
/// timestamp, value token, or annotation marker.
SensorEvent parse_event_line(std::string_view line, std::size_t line_number = 0,
                             const ValueTable& values = ValueTable::defaults());

/// Blank and '#'-prefixed lines are skipped.
EventStream parse_stream(std::string_view text, const ParseOptions& options = {});
EventStream read_stream_file(const std::filesystem::path& path, const ParseOptions& options = {});

/// Canonical spelling: door sensors (id starting with 'D') use OPEN/CLOSE,
/// everything else ON/OFF; markers are lowercase begin/end.
std::string format_event_line(const SensorEvent& event);
std::string serialize_stream(const EventStream& stream);

/// Pairs each Begin marker with the next End marker of the same activity.
/// Only one activity may be open at a time. A Begin/End pair at the same
/// instant encloses no time and is dropped.
std::vector<AnnotationInterval> build_annotation_intervals(const EventStream& stream);

struct TimeSpan {
  Timestamp start;
  Timestamp end;

  friend bool operator==(const TimeSpan&, const TimeSpan&) = default;
};

/// Complement of `intervals` within [first, last], as half-open spans.
std::vector<TimeSpan> gap_spans(const std::vector<AnnotationInterval>& intervals, Timestamp first, Timestamp last);

std::string sha256_hex(std::string_view bytes);

}  // namespace gapmark

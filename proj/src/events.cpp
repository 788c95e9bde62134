#include "gapmark/events.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <openssl/evp.h>

#include "gapmark/error.hpp"

namespace gapmark {
namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) fields.push_back(line.substr(i, j - i));
    i = j;
  }
  return fields;
}

bool is_skippable(std::string_view line) {
  const auto pos = line.find_first_not_of(" \t\r");
  return pos == std::string_view::npos || line[pos] == '#';
}

std::optional<Marker> parse_marker(std::string_view token) {
  std::string lower(token);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  if (lower == "begin") return Marker::Begin;
  if (lower == "end") return Marker::End;
  return std::nullopt;
}

[[noreturn]] void malformed(std::size_t line_number, const std::string& why) {
  throw Error(ErrorCode::MalformedLine, fmt::format("line {}: {}", line_number, why));
}

}  // namespace

ValueTable ValueTable::defaults() {
  ValueTable table;
  table.set("ON", SensorValue::Active);
  table.set("OPEN", SensorValue::Active);
  table.set("OFF", SensorValue::Inactive);
  table.set("CLOSE", SensorValue::Inactive);
  table.set("CLOSED", SensorValue::Inactive);
  return table;
}

std::optional<SensorValue> ValueTable::lookup(std::string_view token) const {
  const auto it = tokens_.find(token);
  if (it == tokens_.end()) return std::nullopt;
  return it->second;
}

SensorEvent parse_event_line(std::string_view line, std::size_t line_number, const ValueTable& values) {
  const auto fields = split_ws(line);
  if (fields.size() != 4 && fields.size() != 6)
    malformed(line_number, fmt::format("expected 4 or 6 fields, got {}", fields.size()));

  SensorEvent event;
  const auto time = parse_timestamp(fields[0], fields[1]);
  if (!time) malformed(line_number, fmt::format("bad timestamp '{} {}'", fields[0], fields[1]));
  event.time = *time;
  event.sensor_id = std::string(fields[2]);

  const auto value = values.lookup(fields[3]);
  if (!value) malformed(line_number, fmt::format("unrecognized value token '{}'", fields[3]));
  event.value = *value;

  if (fields.size() == 6) {
    const auto marker = parse_marker(fields[5]);
    if (!marker) malformed(line_number, fmt::format("bad annotation marker '{}'", fields[5]));
    event.annotation = Annotation{std::string(fields[4]), *marker};
  }
  return event;
}

EventStream parse_stream(std::string_view text, const ParseOptions& options) {
  EventStream stream;
  stream.source_digest = sha256_hex(text);

  std::size_t line_number = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    const auto line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_number;
    if (is_skippable(line)) continue;
    try {
      stream.events.push_back(parse_event_line(line, line_number, options.values));
    } catch (const Error&) {
      if (options.policy == MalformedPolicy::FailFast) throw;
      ++stream.skipped_lines;
    }
  }

  std::stable_sort(stream.events.begin(), stream.events.end(),
                   [](const SensorEvent& a, const SensorEvent& b) { return a.time < b.time; });
  return stream;
}

EventStream read_stream_file(const std::filesystem::path& path, const ParseOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, fmt::format("cannot open '{}'", path.string()));
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_stream(buffer.str(), options);
}

std::string format_event_line(const SensorEvent& event) {
  const bool door = !event.sensor_id.empty() && event.sensor_id.front() == 'D';
  const bool active = event.value == SensorValue::Active;
  const char* token = door ? (active ? "OPEN" : "CLOSE") : (active ? "ON" : "OFF");
  std::string line = fmt::format("{} {} {}", format_timestamp(event.time), event.sensor_id, token);
  if (event.annotation) {
    line += fmt::format(" {} {}", event.annotation->activity,
                        event.annotation->marker == Marker::Begin ? "begin" : "end");
  }
  return line;
}

std::string serialize_stream(const EventStream& stream) {
  std::string out;
  out.reserve(stream.events.size() * 48);
  for (const auto& event : stream.events) {
    out += format_event_line(event);
    out += '\n';
  }
  return out;
}

std::vector<AnnotationInterval> build_annotation_intervals(const EventStream& stream) {
  std::vector<AnnotationInterval> intervals;
  std::optional<AnnotationInterval> open;

  for (const auto& event : stream.events) {
    if (!event.annotation) continue;
    const auto& [activity, marker] = *event.annotation;
    const auto when = format_timestamp(event.time);
    if (marker == Marker::Begin) {
      if (open && open->activity == activity)
        throw Error(ErrorCode::UnmatchedBegin,
                    fmt::format("{} begun at {} and again at {}", activity, format_timestamp(open->start), when));
      if (open)
        throw Error(ErrorCode::OverlappingIntervals,
                    fmt::format("{} begins at {} while {} (begun {}) is still open", activity, when, open->activity,
                                format_timestamp(open->start)));
      open = AnnotationInterval{activity, event.time, event.time};
    } else {
      if (!open || open->activity != activity)
        throw Error(ErrorCode::UnmatchedEnd, fmt::format("{} ends at {} without a matching begin", activity, when));
      open->end = event.time;
      if (open->start < open->end) intervals.push_back(std::move(*open));
      open.reset();
    }
  }
  if (open)
    throw Error(ErrorCode::UnmatchedBegin,
                fmt::format("{} begun at {} never ends", open->activity, format_timestamp(open->start)));
  return intervals;
}

std::vector<TimeSpan> gap_spans(const std::vector<AnnotationInterval>& intervals, Timestamp first, Timestamp last) {
  std::vector<TimeSpan> gaps;
  Timestamp cursor = first;
  for (const auto& interval : intervals) {
    if (interval.end <= cursor) continue;
    if (interval.start >= last) break;
    if (interval.start > cursor) gaps.push_back({cursor, interval.start});
    cursor = interval.end;
  }
  if (cursor < last) gaps.push_back({cursor, last});
  return gaps;
}

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  EVP_Digest(bytes.data(), bytes.size(), digest, &length, EVP_sha256(), nullptr);
  std::string hex;
  hex.reserve(length * 2);
  for (unsigned int i = 0; i < length; ++i) hex += fmt::format("{:02x}", digest[i]);
  return hex;
}

}  // namespace gapmark

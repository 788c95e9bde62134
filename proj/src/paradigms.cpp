#include "gapmark/paradigms.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "gapmark/error.hpp"

namespace gapmark {
namespace {

void check_activity_name(std::string_view name) {
  if (name == kStartSentinel || name == kEndSentinel || name.find_first_of("[]>") != std::string_view::npos)
    throw Error(ErrorCode::ReservedLabel, fmt::format("'{}' collides with gap label syntax", name));
}

LabelSpace infer_space(const SampleSeries& series, Paradigm paradigm, std::initializer_list<std::string_view> declared) {
  std::set<std::string, std::less<>> base;
  std::set<std::string, std::less<>> extra(declared.begin(), declared.end());
  const std::string* previous = nullptr;
  for (const auto& sample : series.samples) {
    if (!sample.label) continue;
    if (previous && *previous == *sample.label) continue;
    previous = &*sample.label;
    if (is_paradigm_label(*sample.label)) {
      extra.insert(*sample.label);
    } else {
      check_activity_name(*sample.label);
      base.insert(*sample.label);
    }
  }
  return LabelSpace{{base.begin(), base.end()}, {extra.begin(), extra.end()}, paradigm};
}

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

std::string_view paradigm_key(Paradigm p) {
  switch (p) {
    case Paradigm::GapRemoval: return "p1";
    case Paradigm::Unknown: return "p2";
    case Paradigm::Interactivity: return "p3";
    case Paradigm::Hybrid: return "hybrid";
  }
  return "?";
}

std::string_view paradigm_name(Paradigm p) {
  switch (p) {
    case Paradigm::GapRemoval: return "P1";
    case Paradigm::Unknown: return "P2";
    case Paradigm::Interactivity: return "P3";
    case Paradigm::Hybrid: return "Hybrid";
  }
  return "?";
}

std::optional<Paradigm> parse_paradigm(std::string_view key) {
  std::string lower(key);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  if (lower == "p1") return Paradigm::GapRemoval;
  if (lower == "p2") return Paradigm::Unknown;
  if (lower == "p3") return Paradigm::Interactivity;
  if (lower == "hybrid") return Paradigm::Hybrid;
  return std::nullopt;
}

std::string gap_label(std::string_view prev, std::string_view next) { return fmt::format("GAP[{}>{}]", prev, next); }

std::optional<std::pair<std::string, std::string>> parse_gap_label(std::string_view label) {
  if (label.size() < 7 || !label.starts_with("GAP[") || label.back() != ']') return std::nullopt;
  const auto body = label.substr(4, label.size() - 5);
  const auto sep = body.find('>');
  if (sep == std::string_view::npos || sep == 0 || sep + 1 == body.size()) return std::nullopt;
  if (body.find('>', sep + 1) != std::string_view::npos) return std::nullopt;
  return std::pair{std::string(body.substr(0, sep)), std::string(body.substr(sep + 1))};
}

bool is_paradigm_label(std::string_view label) {
  return label == kUnknownLabel || parse_gap_label(label).has_value();
}

std::vector<std::string> LabelSpace::states() const {
  std::vector<std::string> out = base_activities;
  out.insert(out.end(), extra_labels.begin(), extra_labels.end());
  return out;
}

bool LabelSpace::is_base(std::string_view label) const {
  return std::binary_search(base_activities.begin(), base_activities.end(), label, std::less<>{});
}

bool LabelSpace::contains(std::string_view label) const {
  return is_base(label) || std::binary_search(extra_labels.begin(), extra_labels.end(), label, std::less<>{});
}

std::vector<GapRun> find_gap_runs(const SampleSeries& series) {
  std::vector<GapRun> runs;
  const auto& s = series.samples;
  std::size_t i = 0;
  while (i < s.size()) {
    if (s[i].label) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j + 1 < s.size() && !s[j + 1].label) ++j;
    GapRun run;
    run.first = i;
    run.last = j;
    run.prev = i == 0 ? std::string(kStartSentinel) : *s[i - 1].label;
    run.next = j + 1 == s.size() ? std::string(kEndSentinel) : *s[j + 1].label;
    runs.push_back(std::move(run));
    i = j + 1;
  }
  return runs;
}

Transformed apply_gap_removal(const SampleSeries& series) {
  SampleSeries out{series.delta_t, series.sensor_count, {}, {}};
  out.samples.reserve(series.samples.size());
  for (const auto& sample : series.samples)
    if (sample.label) out.samples.push_back(sample);
  if (out.samples.empty() && !series.samples.empty())
    throw Error(ErrorCode::AllSamplesNull, "every sample is an annotation gap; nothing left to train on");
  out.refresh_alphabet();
  auto space = infer_space(out, Paradigm::GapRemoval, {});
  return {std::move(out), std::move(space)};
}

Transformed apply_unknown_label(const SampleSeries& series) {
  SampleSeries out = series;
  for (auto& sample : out.samples)
    if (!sample.label) sample.label = std::string(kUnknownLabel);
  auto space = infer_space(out, Paradigm::Unknown, {kUnknownLabel});
  return {std::move(out), std::move(space)};
}

Transformed apply_interactivity_labels(const SampleSeries& series) {
  SampleSeries out = series;
  for (const auto& run : find_gap_runs(series)) {
    const std::string label = gap_label(run.prev, run.next);
    for (std::size_t i = run.first; i <= run.last; ++i) out.samples[i].label = label;
  }
  auto space = infer_space(out, Paradigm::Interactivity, {});
  return {std::move(out), std::move(space)};
}

std::vector<SemanticRule> parse_rules(std::string_view text) {
  std::vector<SemanticRule> rules;
  std::size_t pos = 0;
  std::size_t line_number = 0;
  while (pos < text.size()) {
    auto eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    auto line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_number;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto arrow = line.find("->");
    if (arrow == std::string_view::npos)
      throw Error(ErrorCode::InvalidRule, fmt::format("line {}: expected 'preceding -> following'", line_number));
    SemanticRule rule{std::string(trim(line.substr(0, arrow))), std::string(trim(line.substr(arrow + 2)))};
    if (rule.preceding.empty() || rule.following.empty())
      throw Error(ErrorCode::InvalidRule, fmt::format("line {}: empty activity name", line_number));
    if (rule.preceding == rule.following)
      throw Error(ErrorCode::InvalidRule, fmt::format("line {}: '{}' cannot extend into itself", line_number, rule.preceding));
    for (const auto& name : {rule.preceding, rule.following}) {
      if (is_paradigm_label(name) || name == kStartSentinel || name == kEndSentinel ||
          name.find_first_of(" \t[]>") != std::string::npos)
        throw Error(ErrorCode::InvalidRule, fmt::format("line {}: '{}' is not an activity name", line_number, name));
    }
    rules.push_back(std::move(rule));
  }
  return rules;
}

std::vector<SemanticRule> load_rules(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, fmt::format("cannot open rule file '{}'", path.string()));
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_rules(buffer.str());
}

std::vector<SemanticRule> default_rules() { return {{"Leaving_Home", "Entering_Home"}}; }

SampleSeries apply_semantic_preprocess(const SampleSeries& series, std::span<const SemanticRule> rules) {
  SampleSeries out = series;
  if (rules.empty()) return out;
  for (const auto& run : find_gap_runs(series)) {
    // Edge gaps have a sentinel on one side and never match a rule.
    if (run.prev == kStartSentinel || run.next == kEndSentinel) continue;
    const bool matched = std::any_of(rules.begin(), rules.end(), [&](const SemanticRule& r) {
      return r.preceding == run.prev && r.following == run.next;
    });
    if (!matched) continue;
    for (std::size_t i = run.first; i <= run.last; ++i) out.samples[i].label = run.prev;
  }
  return out;
}

Transformed apply_hybrid(const SampleSeries& series, std::span<const SemanticRule> rules) {
  auto result = apply_interactivity_labels(apply_semantic_preprocess(series, rules));
  result.space.paradigm = Paradigm::Hybrid;
  return result;
}

Transformed apply_paradigm(Paradigm paradigm, const SampleSeries& series, std::span<const SemanticRule> rules) {
  switch (paradigm) {
    case Paradigm::GapRemoval: return apply_gap_removal(series);
    case Paradigm::Unknown: return apply_unknown_label(series);
    case Paradigm::Interactivity: return apply_interactivity_labels(series);
    case Paradigm::Hybrid: return apply_hybrid(series, rules);
  }
  throw Error(ErrorCode::InvariantViolation, "unhandled paradigm");
}

std::optional<std::string> project_to_ground_truth(std::string_view label, const LabelSpace& space) {
  if (space.is_base(label)) return std::string(label);
  if (is_paradigm_label(label)) return std::nullopt;
  throw Error(ErrorCode::UnknownLabelToken, fmt::format("'{}' is neither a base activity nor a paradigm label", label));
}

}  // namespace gapmark

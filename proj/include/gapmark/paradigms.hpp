#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "gapmark/sampling.hpp"

namespace gapmark {

enum class Paradigm {
  GapRemoval,     // #1: drop gap samples
  Unknown,        // #2: one shared "Unknown" state
  Interactivity,  // #3: one state per ordered (prev, next) activity pair
  Hybrid,         // semantic preprocessing, then #3
};

/// "p1", "p2", "p3", "hybrid".
std::string_view paradigm_key(Paradigm p);
/// "P1", "P2", "P3", "Hybrid".
std::string_view paradigm_name(Paradigm p);
std::optional<Paradigm> parse_paradigm(std::string_view key);

inline constexpr std::string_view kUnknownLabel = "Unknown";
inline constexpr std::string_view kStartSentinel = "^";
inline constexpr std::string_view kEndSentinel = "$";

/// "GAP[prev>next]".
std::string gap_label(std::string_view prev, std::string_view next);
std::optional<std::pair<std::string, std::string>> parse_gap_label(std::string_view label);
/// True for "Unknown" and well-formed gap labels.
bool is_paradigm_label(std::string_view label);

struct LabelSpace {
  std::vector<std::string> base_activities;  // sorted
  std::vector<std::string> extra_labels;     // sorted
  Paradigm paradigm = Paradigm::GapRemoval;

  /// base_activities followed by extra_labels; this is the HMM state order.
  std::vector<std::string> states() const;
  std::size_t size() const { return base_activities.size() + extra_labels.size(); }
  bool is_base(std::string_view label) const;
  bool contains(std::string_view label) const;

  friend bool operator==(const LabelSpace&, const LabelSpace&) = default;
};

/// Maximal run of Null labels, indices inclusive. prev/next are the nearest
/// labeled neighbours, or the sentinels at the series edges.
struct GapRun {
  std::size_t first = 0;
  std::size_t last = 0;
  std::string prev;
  std::string next;

  std::size_t length() const { return last - first + 1; }
  friend bool operator==(const GapRun&, const GapRun&) = default;
};

std::vector<GapRun> find_gap_runs(const SampleSeries& series);

struct Transformed {
  SampleSeries series;
  LabelSpace space;
};

Transformed apply_gap_removal(const SampleSeries& series);
Transformed apply_unknown_label(const SampleSeries& series);
Transformed apply_interactivity_labels(const SampleSeries& series);

/// A gap between `preceding` and `following` is absorbed by extending `preceding`.
struct SemanticRule {
  std::string preceding;
  std::string following;

  friend bool operator==(const SemanticRule&, const SemanticRule&) = default;
};

/// One "preceding -> following" per line, '#' comments.
std::vector<SemanticRule> parse_rules(std::string_view text);
std::vector<SemanticRule> load_rules(const std::filesystem::path& path);
/// Leaving_Home -> Entering_Home.
std::vector<SemanticRule> default_rules();

SampleSeries apply_semantic_preprocess(const SampleSeries& series, std::span<const SemanticRule> rules);
/// apply_semantic_preprocess followed by apply_interactivity_labels.
Transformed apply_hybrid(const SampleSeries& series, std::span<const SemanticRule> rules);

Transformed apply_paradigm(Paradigm paradigm, const SampleSeries& series, std::span<const SemanticRule> rules = {});

/// Base activities map to themselves, paradigm labels to nullopt (NotAnActivity).
/// Anything else is Error(UnknownLabelToken).
std::optional<std::string> project_to_ground_truth(std::string_view label, const LabelSpace& space);

}  // namespace gapmark

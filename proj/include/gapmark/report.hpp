#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "gapmark/eval.hpp"
#include "gapmark/hmm.hpp"
#include "gapmark/paradigms.hpp"

namespace gapmark {

inline constexpr std::string_view kReportSchema = "gapmark.report/1";

inline constexpr std::string_view kScoringPolicy =
    "test labels are raw annotations; gap samples are not scored; a paradigm label predicted on an "
    "annotated sample counts as a false negative for the true activity and a false positive for none";

struct ParadigmConfig {
  Paradigm paradigm = Paradigm::Interactivity;
  std::vector<SemanticRule> rules;  // used by Hybrid only
};

struct ParadigmRun {
  Paradigm paradigm = Paradigm::Interactivity;
  std::size_t train_samples = 0;  // after the paradigm transform
  std::size_t state_count = 0;
  std::size_t symbol_count = 0;
  std::vector<std::string> extra_labels;
  std::size_t interactivity_labels = 0;  // realized N*
  std::vector<std::size_t> fallback_rows;
  ConfusionMatrix confusion;
  std::vector<ClassMetrics> metrics;
  Ratio mean_recall;
  Ratio mean_precision;
  Ratio mean_accuracy;
  Ratio mean_specificity;
  double viterbi_log_probability = 0;
  double test_log_likelihood = 0;
  std::vector<std::string> predicted;  // decoded test labels; not serialized

  const ClassMetrics* find(std::string_view activity) const;
};

struct ComparisonReport {
  std::vector<std::pair<std::string, std::string>> config;  // resolved run configuration
  std::string dataset_digest;
  double train_fraction = 0;
  double smoothing_alpha = 0;
  std::size_t total_samples = 0;
  std::size_t train_samples = 0;
  std::size_t test_samples = 0;
  std::size_t train_gap_samples = 0;
  std::size_t test_gap_samples = 0;
  std::vector<ParadigmRun> runs;
};

/// Decodes `test` with `model` and scores it against the raw test labels.
ParadigmRun score_model(const HmmModel& model, const LabelSpace& space, const SampleSeries& test);

/// Rebuilds the label space a model was trained under from its state list.
LabelSpace space_from_model(const HmmModel& model);

/// Every paradigm is trained on the same chronological training prefix and
/// scored on the same untouched test suffix.
ComparisonReport compare_paradigms(const SampleSeries& series, double train_fraction,
                                   std::span<const ParadigmConfig> paradigms, double alpha = kDefaultSmoothing);

/// Throws Error(InvariantViolation) if any class breaks TP+FP+TN+FN = evaluated_total.
void check_report(const ComparisonReport& report);

std::string render_table(const ComparisonReport& report);
/// Rows: activity x metric; columns: one per paradigm.
std::string render_csv(const ComparisonReport& report);
nlohmann::ordered_json report_to_json(const ComparisonReport& report);

}  // namespace gapmark

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gapmark/paradigms.hpp"
#include "gapmark/sampling.hpp"

namespace gapmark {

inline constexpr std::string_view kNotAnActivity = "NotAnActivity";

/// Rows are true classes, columns predicted classes. Index classes.size() is
/// the NotAnActivity bucket (paradigm labels predicted on annotated samples).
struct ConfusionMatrix {
  std::vector<std::string> classes;  // sorted base activities
  std::vector<std::size_t> counts;   // (K + 1) x (K + 1), row-major
  std::size_t evaluated_total = 0;

  std::size_t dimension() const { return classes.size() + 1; }
  std::size_t bucket() const { return classes.size(); }
  std::size_t at(std::size_t truth, std::size_t predicted) const { return counts[truth * dimension() + predicted]; }
  std::optional<std::size_t> index_of(std::string_view activity) const;
};

/// Scores only positions where truth is not Null. Predictions are projected
/// through `space`; paradigm labels land in the NotAnActivity bucket.
/// Classes are the union of truth activities and space.base_activities.
ConfusionMatrix confusion(std::span<const Label> truth, std::span<const std::string> predicted,
                          const LabelSpace& space);

struct OneVsRest {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;

  friend bool operator==(const OneVsRest&, const OneVsRest&) = default;
};

OneVsRest one_vs_rest(const ConfusionMatrix& cm, std::string_view activity);

/// nullopt when the denominator is zero ("n/a").
using Ratio = std::optional<double>;

Ratio recall(const ConfusionMatrix& cm, std::string_view activity);
Ratio precision(const ConfusionMatrix& cm, std::string_view activity);
Ratio accuracy(const ConfusionMatrix& cm, std::string_view activity);
Ratio specificity(const ConfusionMatrix& cm, std::string_view activity);

Ratio recall(const OneVsRest& c);
Ratio precision(const OneVsRest& c);
Ratio accuracy(const OneVsRest& c);
Ratio specificity(const OneVsRest& c);

struct ClassMetrics {
  std::string activity;
  OneVsRest counts;
  Ratio recall;
  Ratio precision;
  Ratio accuracy;
  Ratio specificity;
};

std::vector<ClassMetrics> class_metrics(const ConfusionMatrix& cm);

/// Mean of the defined values; nullopt when none is defined.
Ratio mean_defined(std::span<const Ratio> values);

/// "n/a" or six decimals.
std::string format_ratio(const Ratio& r);

}  // namespace gapmark

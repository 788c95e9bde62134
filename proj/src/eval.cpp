#include "gapmark/eval.hpp"

#include <algorithm>
#include <set>

#include <fmt/format.h>

#include "gapmark/error.hpp"

namespace gapmark {

std::optional<std::size_t> ConfusionMatrix::index_of(std::string_view activity) const {
  const auto it = std::lower_bound(classes.begin(), classes.end(), activity, std::less<>{});
  if (it == classes.end() || *it != activity) return std::nullopt;
  return static_cast<std::size_t>(it - classes.begin());
}

ConfusionMatrix confusion(std::span<const Label> truth, std::span<const std::string> predicted,
                          const LabelSpace& space) {
  if (truth.size() != predicted.size())
    throw Error(ErrorCode::LengthMismatch,
                fmt::format("{} truth labels vs {} predictions", truth.size(), predicted.size()));

  std::set<std::string, std::less<>> classes(space.base_activities.begin(), space.base_activities.end());
  for (const auto& t : truth)
    if (t) classes.insert(*t);

  ConfusionMatrix cm;
  cm.classes.assign(classes.begin(), classes.end());
  const std::size_t d = cm.dimension();
  cm.counts.assign(d * d, 0);

  // Labels arrive in long runs; memoize the last lookup on each side.
  const std::string* last_truth = nullptr;
  std::size_t truth_index = 0;
  const std::string* last_pred = nullptr;
  std::size_t pred_index = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (!truth[i]) continue;
    if (!last_truth || *last_truth != *truth[i]) {
      last_truth = &*truth[i];
      truth_index = *cm.index_of(*truth[i]);
    }
    if (!last_pred || *last_pred != predicted[i]) {
      last_pred = &predicted[i];
      const auto projected = project_to_ground_truth(predicted[i], space);
      pred_index = projected ? *cm.index_of(*projected) : cm.bucket();
    }
    ++cm.counts[truth_index * d + pred_index];
    ++cm.evaluated_total;
  }
  return cm;
}

OneVsRest one_vs_rest(const ConfusionMatrix& cm, std::string_view activity) {
  const auto k = cm.index_of(activity);
  if (!k) throw Error(ErrorCode::UnknownActivity, fmt::format("'{}' is not a class of this matrix", activity));
  OneVsRest c;
  const std::size_t d = cm.dimension();
  std::size_t row = 0;
  std::size_t column = 0;
  for (std::size_t j = 0; j < d; ++j) row += cm.at(*k, j);
  for (std::size_t i = 0; i < d; ++i) column += cm.at(i, *k);
  c.tp = cm.at(*k, *k);
  c.fn = row - c.tp;
  c.fp = column - c.tp;
  c.tn = cm.evaluated_total - c.tp - c.fn - c.fp;
  return c;
}

namespace {

Ratio ratio(std::size_t num, std::size_t den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

Ratio recall(const OneVsRest& c) { return ratio(c.tp, c.tp + c.fn); }
Ratio precision(const OneVsRest& c) { return ratio(c.tp, c.tp + c.fp); }
Ratio accuracy(const OneVsRest& c) { return ratio(c.tp + c.tn, c.tp + c.tn + c.fp + c.fn); }
Ratio specificity(const OneVsRest& c) { return ratio(c.tn, c.tn + c.fp); }

Ratio recall(const ConfusionMatrix& cm, std::string_view activity) { return recall(one_vs_rest(cm, activity)); }
Ratio precision(const ConfusionMatrix& cm, std::string_view activity) { return precision(one_vs_rest(cm, activity)); }
Ratio accuracy(const ConfusionMatrix& cm, std::string_view activity) { return accuracy(one_vs_rest(cm, activity)); }
Ratio specificity(const ConfusionMatrix& cm, std::string_view activity) {
  return specificity(one_vs_rest(cm, activity));
}

std::vector<ClassMetrics> class_metrics(const ConfusionMatrix& cm) {
  std::vector<ClassMetrics> out;
  out.reserve(cm.classes.size());
  for (const auto& name : cm.classes) {
    const auto c = one_vs_rest(cm, name);
    out.push_back({name, c, recall(c), precision(c), accuracy(c), specificity(c)});
  }
  return out;
}

Ratio mean_defined(std::span<const Ratio> values) {
  double sum = 0;
  std::size_t count = 0;
  for (const auto& v : values) {
    if (!v) continue;
    sum += *v;
    ++count;
  }
  if (count == 0) return std::nullopt;
  return sum / static_cast<double>(count);
}

std::string format_ratio(const Ratio& r) { return r ? fmt::format("{:.6f}", *r) : std::string("n/a"); }

}  // namespace gapmark

#include "gapmark/report.hpp"

#include <algorithm>
#include <future>
#include <set>

#include <fmt/format.h>

#include "gapmark/error.hpp"

namespace gapmark {
namespace {

nlohmann::ordered_json ratio_json(const Ratio& r) { return r ? nlohmann::ordered_json(*r) : nlohmann::ordered_json(); }

void fill_means(ParadigmRun& run) {
  std::vector<Ratio> r, p, a, s;
  for (const auto& m : run.metrics) {
    r.push_back(m.recall);
    p.push_back(m.precision);
    a.push_back(m.accuracy);
    s.push_back(m.specificity);
  }
  run.mean_recall = mean_defined(r);
  run.mean_precision = mean_defined(p);
  run.mean_accuracy = mean_defined(a);
  run.mean_specificity = mean_defined(s);
}

std::size_t count_gap_labels(const std::vector<std::string>& labels) {
  return static_cast<std::size_t>(
      std::count_if(labels.begin(), labels.end(), [](const std::string& l) { return parse_gap_label(l).has_value(); }));
}

}  // namespace

const ClassMetrics* ParadigmRun::find(std::string_view activity) const {
  for (const auto& m : metrics)
    if (m.activity == activity) return &m;
  return nullptr;
}

LabelSpace space_from_model(const HmmModel& model) {
  LabelSpace space;
  if (const auto p = parse_paradigm(model.paradigm)) space.paradigm = *p;
  for (const auto& s : model.states) (is_paradigm_label(s) ? space.extra_labels : space.base_activities).push_back(s);
  std::sort(space.base_activities.begin(), space.base_activities.end());
  std::sort(space.extra_labels.begin(), space.extra_labels.end());
  return space;
}

ParadigmRun score_model(const HmmModel& model, const LabelSpace& space, const SampleSeries& test) {
  if (test.samples.empty()) throw Error(ErrorCode::EmptySeries, "test split is empty");
  ParadigmRun run;
  run.paradigm = space.paradigm;
  run.state_count = model.state_count();
  run.symbol_count = model.symbol_count();
  run.extra_labels = space.extra_labels;
  run.interactivity_labels = count_gap_labels(space.extra_labels);
  run.fallback_rows = model.fallback_rows;

  const auto symbols = model.symbols_of(test.codes());
  const auto path = viterbi_decode(model, symbols);
  run.viterbi_log_probability = path.log_probability;
  run.test_log_likelihood = sequence_log_likelihood(model, symbols);

  run.predicted.reserve(path.states.size());
  for (auto q : path.states) run.predicted.push_back(model.states[q]);
  const auto truth = test.labels();
  run.confusion = confusion(truth, run.predicted, space);
  run.metrics = class_metrics(run.confusion);
  fill_means(run);
  return run;
}

ComparisonReport compare_paradigms(const SampleSeries& series, double train_fraction,
                                   std::span<const ParadigmConfig> paradigms, double alpha) {
  if (paradigms.empty()) throw Error(ErrorCode::InvalidConfig, "no paradigms selected");
  auto [train, test] = chronological_split(series, train_fraction);
  if (train.samples.empty()) throw Error(ErrorCode::EmptySeries, "training split is empty");

  ComparisonReport report;
  report.train_fraction = train_fraction;
  report.smoothing_alpha = alpha;
  report.total_samples = series.size();
  report.train_samples = train.size();
  report.test_samples = test.size();
  report.train_gap_samples = train.null_count();
  report.test_gap_samples = test.null_count();

  std::vector<std::future<ParadigmRun>> jobs;
  for (const auto& config : paradigms) {
    jobs.push_back(std::async(std::launch::async, [&train = train, &test = test, config, alpha] {
      const auto transformed = apply_paradigm(config.paradigm, train, config.rules);
      const auto model = estimate(transformed.series, transformed.space, alpha);
      auto run = score_model(model, transformed.space, test);
      run.train_samples = transformed.series.size();
      return run;
    }));
  }
  for (auto& job : jobs) report.runs.push_back(job.get());
  check_report(report);
  return report;
}

void check_report(const ComparisonReport& report) {
  for (const auto& run : report.runs) {
    for (const auto& m : run.metrics) {
      const auto& c = m.counts;
      if (c.tp + c.fp + c.tn + c.fn != run.confusion.evaluated_total)
        throw Error(ErrorCode::InvariantViolation,
                    fmt::format("{} / {}: TP+FP+TN+FN = {} but {} samples were evaluated", paradigm_name(run.paradigm),
                                m.activity, c.tp + c.fp + c.tn + c.fn, run.confusion.evaluated_total));
    }
  }
}

std::string render_table(const ComparisonReport& report) {
  std::string out;
  out += fmt::format("samples: {} total, {} train ({} gap), {} test ({} gap); alpha {}\n", report.total_samples,
                     report.train_samples, report.train_gap_samples, report.test_samples, report.test_gap_samples,
                     report.smoothing_alpha);
  for (const auto& run : report.runs) {
    out += fmt::format("\n== {} == states {}, symbols {}, N* {}, train samples {}, evaluated {}\n",
                       paradigm_name(run.paradigm), run.state_count, run.symbol_count, run.interactivity_labels,
                       run.train_samples, run.confusion.evaluated_total);
    out += fmt::format("{:<24} {:>8} {:>8} {:>8} {:>8}  {:>10} {:>10} {:>10} {:>10}\n", "activity", "TP", "FP", "TN",
                       "FN", "recall", "precision", "accuracy", "specific.");
    for (const auto& m : run.metrics) {
      out += fmt::format("{:<24} {:>8} {:>8} {:>8} {:>8}  {:>10} {:>10} {:>10} {:>10}\n", m.activity, m.counts.tp,
                         m.counts.fp, m.counts.tn, m.counts.fn, format_ratio(m.recall), format_ratio(m.precision),
                         format_ratio(m.accuracy), format_ratio(m.specificity));
    }
    out += fmt::format("{:<24} {:>8} {:>8} {:>8} {:>8}  {:>10} {:>10} {:>10} {:>10}\n", "mean", "", "", "", "",
                       format_ratio(run.mean_recall), format_ratio(run.mean_precision),
                       format_ratio(run.mean_accuracy), format_ratio(run.mean_specificity));
  }
  return out;
}

std::string render_csv(const ComparisonReport& report) {
  std::set<std::string> activities;
  for (const auto& run : report.runs)
    for (const auto& m : run.metrics) activities.insert(m.activity);

  std::string out = "activity,metric";
  for (const auto& run : report.runs) out += fmt::format(",{}", paradigm_name(run.paradigm));
  out += '\n';

  using Getter = Ratio (*)(const ClassMetrics&);
  const std::pair<const char*, Getter> metrics[] = {
      {"recall", [](const ClassMetrics& m) { return m.recall; }},
      {"precision", [](const ClassMetrics& m) { return m.precision; }},
      {"accuracy", [](const ClassMetrics& m) { return m.accuracy; }},
      {"specificity", [](const ClassMetrics& m) { return m.specificity; }},
  };
  for (const auto& activity : activities) {
    for (const auto& [name, get] : metrics) {
      out += fmt::format("{},{}", activity, name);
      for (const auto& run : report.runs) {
        const auto* m = run.find(activity);
        out += ',';
        out += m ? format_ratio(get(*m)) : std::string("n/a");
      }
      out += '\n';
    }
  }
  const std::pair<const char*, Ratio ParadigmRun::*> means[] = {
      {"recall", &ParadigmRun::mean_recall},
      {"precision", &ParadigmRun::mean_precision},
      {"accuracy", &ParadigmRun::mean_accuracy},
      {"specificity", &ParadigmRun::mean_specificity},
  };
  for (const auto& [name, member] : means) {
    out += fmt::format("mean,{}", name);
    for (const auto& run : report.runs) out += ',' + format_ratio(run.*member);
    out += '\n';
  }
  return out;
}

nlohmann::ordered_json report_to_json(const ComparisonReport& report) {
  using json = nlohmann::ordered_json;
  json root;
  root["schema"] = kReportSchema;
  root["dataset_digest"] = report.dataset_digest;
  json config = json::object();
  for (const auto& [k, v] : report.config) config[k] = v;
  root["config"] = config;
  root["train_fraction"] = report.train_fraction;
  root["smoothing_alpha"] = report.smoothing_alpha;
  root["samples"] = {{"total", report.total_samples},
                     {"train", report.train_samples},
                     {"test", report.test_samples},
                     {"train_gaps", report.train_gap_samples},
                     {"test_gaps", report.test_gap_samples}};
  root["scoring_policy"] = kScoringPolicy;

  json runs = json::array();
  for (const auto& run : report.runs) {
    json r;
    r["paradigm"] = paradigm_name(run.paradigm);
    r["key"] = paradigm_key(run.paradigm);
    r["states"] = run.state_count;
    r["symbols"] = run.symbol_count;
    r["interactivity_labels"] = run.interactivity_labels;
    r["extra_labels"] = run.extra_labels;
    r["train_samples"] = run.train_samples;
    r["evaluated_total"] = run.confusion.evaluated_total;
    r["fallback_rows"] = run.fallback_rows;
    r["viterbi_log_probability"] = run.viterbi_log_probability;
    r["test_log_likelihood"] = run.test_log_likelihood;
    json classes = json::array();
    for (const auto& m : run.metrics) {
      classes.push_back({{"activity", m.activity},
                         {"tp", m.counts.tp},
                         {"fp", m.counts.fp},
                         {"tn", m.counts.tn},
                         {"fn", m.counts.fn},
                         {"recall", ratio_json(m.recall)},
                         {"precision", ratio_json(m.precision)},
                         {"accuracy", ratio_json(m.accuracy)},
                         {"specificity", ratio_json(m.specificity)}});
    }
    r["classes"] = classes;
    r["mean"] = {{"recall", ratio_json(run.mean_recall)},
                 {"precision", ratio_json(run.mean_precision)},
                 {"accuracy", ratio_json(run.mean_accuracy)},
                 {"specificity", ratio_json(run.mean_specificity)}};
    json labels = run.confusion.classes;
    labels.push_back(kNotAnActivity);
    json rows = json::array();
    for (std::size_t i = 0; i < run.confusion.dimension(); ++i) {
      json row = json::array();
      for (std::size_t j = 0; j < run.confusion.dimension(); ++j) row.push_back(run.confusion.at(i, j));
      rows.push_back(row);
    }
    r["confusion"] = {{"labels", labels}, {"counts", rows}};
    runs.push_back(r);
  }
  root["paradigms"] = runs;
  return root;
}

}  // namespace gapmark

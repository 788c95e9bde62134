#include "gapmark/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "gapmark/error.hpp"
#include "gapmark/events.hpp"
#include "gapmark/hmm.hpp"
#include "gapmark/report.hpp"
#include "gapmark/synth.hpp"

namespace gapmark {
namespace {

namespace fs = std::filesystem;

[[noreturn]] void usage(const std::string& why) { throw Error(ErrorCode::Usage, why); }

double parse_number(std::string_view key, std::string_view value) {
  const std::string text(value);
  char* end = nullptr;
  const double d = std::strtod(text.c_str(), &end);
  if (text.empty() || *end != '\0' || !std::isfinite(d)) usage(fmt::format("{}: '{}' is not a number", key, value));
  return d;
}

std::uint64_t parse_count(std::string_view key, std::string_view value) {
  const double d = parse_number(key, value);
  if (d < 0 || d != std::floor(d) || d > 1.8e19) usage(fmt::format("{}: '{}' is not a nonnegative integer", key, value));
  return static_cast<std::uint64_t>(d);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, fmt::format("cannot open '{}'", path.string()));
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const fs::path& path, std::string_view contents) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, fmt::format("cannot write '{}'", path.string()));
  out << contents;
  if (!out) throw Error(ErrorCode::Io, fmt::format("failed writing '{}'", path.string()));
}

std::string format_seconds(double s) { return fmt::format("{:g}", s); }

// Everything a command needs from its input source.
struct Dataset {
  SampleSeries series;
  std::string digest;
  std::size_t events = 0;
  std::size_t skipped_lines = 0;
  std::size_t sensors = 0;
  std::optional<DeltaTRange> recommended;
  std::optional<SampleSeries> truth;  // synthetic inputs only
};

SynthConfig resolve_synth(const RunConfig& config) {
  SynthConfig synth;
  if (config.synth_config) {
    auto text = read_file(*config.synth_config);
    if (config.synth_preset) text = "preset=" + *config.synth_preset + "\n" + text;
    synth = synth_config_from_text(text + fmt::format("\nseed={}\n", config.seed));
  } else {
    synth = synth_preset(*config.synth_preset, config.seed);
  }
  if (config.samples) synth.samples = *config.samples;
  return synth;
}

Dataset from_stream(const EventStream& stream, const RunConfig& config) {
  Dataset data;
  data.digest = stream.source_digest;
  data.events = stream.events.size();
  data.skipped_lines = stream.skipped_lines;
  if (stream.events.size() >= 2) data.recommended = recommend_delta_t(stream);
  const auto map = SensorMap::from_stream(stream);
  data.sensors = map.size();
  Duration delta_t{};
  if (config.delta_t) {
    delta_t = Duration::from_seconds(*config.delta_t);
  } else {
    if (!data.recommended) throw Error(ErrorCode::TooFewEvents, "delta_t=auto needs at least 2 events");
    delta_t = Duration::from_seconds(data.recommended->midpoint());
  }
  data.series = assign_labels(resample(stream, map, delta_t, config.latch_mode), build_annotation_intervals(stream));
  return data;
}

Dataset load_dataset(const RunConfig& config) {
  if (config.input) {
    const fs::path path(*config.input);
    if (path.extension() == ".csv") {
      const auto text = read_file(path);
      Dataset data;
      data.digest = sha256_hex(text);
      std::optional<Duration> dt;
      if (config.delta_t) dt = Duration::from_seconds(*config.delta_t);
      data.series = series_from_csv(text, dt);
      data.sensors = data.series.sensor_count;
      return data;
    }
    ParseOptions options;
    options.policy = config.skip_malformed ? MalformedPolicy::Skip : MalformedPolicy::FailFast;
    return from_stream(read_stream_file(path, options), config);
  }
  const auto synth = generate(resolve_synth(config));
  auto data = from_stream(synth.stream, config);
  if (data.series.delta_t == synth.truth.delta_t) data.truth = synth.truth;
  return data;
}

std::vector<SemanticRule> resolve_rules(const RunConfig& config) {
  return config.rules ? load_rules(*config.rules) : default_rules();
}

// ---------------------------------------------------------------------------

int cmd_ingest(const RunConfig& config, std::ostream& out) {
  const auto data = load_dataset(config);
  const auto& series = data.series;
  const fs::path csv = fs::path(config.out) / "samples.csv";
  write_file(csv, series_to_csv(series));

  std::map<std::string, std::size_t> per_activity;
  for (const auto& s : series.samples)
    if (s.label) ++per_activity[*s.label];
  const auto gaps = series.null_count();
  const auto runs = find_gap_runs(series);

  out << fmt::format("input digest: {}\n", data.digest);
  out << fmt::format("events: {} (skipped lines: {})\n", data.events, data.skipped_lines);
  out << fmt::format("sensors: {}\n", data.sensors);
  out << fmt::format("delta_t: {} s\n", format_seconds(series.delta_t.seconds()));
  out << fmt::format("samples: {}\n", series.size());
  out << fmt::format("gap samples: {} (fraction {:.6f})\n", gaps,
                     series.size() ? static_cast<double>(gaps) / static_cast<double>(series.size()) : 0.0);
  out << fmt::format("gap runs: {}\n", runs.size());
  if (data.recommended)
    out << fmt::format("recommended delta_t: [{}, {}] s\n", format_seconds(data.recommended->low),
                       format_seconds(data.recommended->high));
  out << fmt::format("activities: {}\n", per_activity.size());
  for (const auto& [name, count] : per_activity) out << fmt::format("  {:<24} {}\n", name, count);
  out << fmt::format("wrote {}\n", csv.string());
  return 0;
}

int cmd_train(const RunConfig& config, std::ostream& out) {
  const auto data = load_dataset(config);
  const auto rules = resolve_rules(config);
  const auto [train, test] = chronological_split(data.series, config.train_fraction);
  if (train.samples.empty()) throw Error(ErrorCode::EmptySeries, "training split is empty");
  for (const auto paradigm : config.paradigms) {
    const auto transformed = apply_paradigm(paradigm, train, rules);
    auto model = estimate(transformed.series, transformed.space, config.alpha);
    model.training_digest = data.digest;
    const fs::path path = fs::path(config.out) / fmt::format("model-{}.hmm", paradigm_key(paradigm));
    std::ostringstream buffer;
    save_model(model, buffer);
    write_file(path, buffer.str());
    std::size_t n_star = 0;
    for (const auto& l : transformed.space.extra_labels) n_star += parse_gap_label(l).has_value();
    out << fmt::format("{}: N_total {}, M_total {}, base activities {}, N* {}, train samples {}\n",
                       paradigm_name(paradigm), model.state_count(), model.symbol_count(),
                       transformed.space.base_activities.size(), n_star, transformed.series.size());
    if (!model.fallback_rows.empty())
      out << fmt::format("  {} state(s) had no counts and received uniform rows\n", model.fallback_rows.size());
    out << fmt::format("  wrote {}\n", path.string());
  }
  return 0;
}

int cmd_evaluate(const RunConfig& config, std::ostream& out) {
  const auto data = load_dataset(config);
  ComparisonReport report;
  if (config.model) {
    std::ifstream in(*config.model);
    if (!in) throw Error(ErrorCode::Io, fmt::format("cannot open model '{}'", *config.model));
    const auto model = load_model(in);
    const auto [train, test] = chronological_split(data.series, config.train_fraction);
    auto run = score_model(model, space_from_model(model), test);
    run.train_samples = train.size();
    report.train_fraction = config.train_fraction;
    report.smoothing_alpha = model.smoothing_alpha;
    report.total_samples = data.series.size();
    report.train_samples = train.size();
    report.test_samples = test.size();
    report.train_gap_samples = train.null_count();
    report.test_gap_samples = test.null_count();
    report.runs.push_back(std::move(run));
    check_report(report);
  } else {
    const auto rules = resolve_rules(config);
    std::vector<ParadigmConfig> paradigms;
    for (auto p : config.paradigms) paradigms.push_back({p, rules});
    report = compare_paradigms(data.series, config.train_fraction, paradigms, config.alpha);
  }
  report.dataset_digest = data.digest;
  report.config = config.echo();

  const fs::path dir(config.out);
  write_file(dir / "report.csv", render_csv(report));
  write_file(dir / "report.json", report_to_json(report).dump(2) + "\n");
  out << render_table(report);
  out << fmt::format("\nwrote {} and {}\n", (dir / "report.csv").string(), (dir / "report.json").string());
  return 0;
}

int cmd_synth(const RunConfig& config, std::ostream& out) {
  if (config.input) usage("synth takes --synth-preset or --synth-config, not --input");
  const auto synth = resolve_synth(config);
  const auto generated = generate(synth);
  const fs::path dir(config.out);
  write_file(dir / "events.txt", serialize_stream(generated.stream));
  write_file(dir / "truth.csv", series_to_csv(generated.truth));
  const auto gaps = generated.gapped.null_count();
  out << fmt::format("activities: {}, sensors: {}, samples: {}, events: {}\n", synth.activities.size(),
                     synth.sensor_ids.size(), generated.gapped.size(), generated.stream.events.size());
  out << fmt::format("gap samples: {} (fraction {:.6f})\n", gaps,
                     static_cast<double>(gaps) / static_cast<double>(generated.gapped.size()));
  if (generated.stream.events.size() >= 2) {
    const auto r = recommend_delta_t(generated.stream);
    out << fmt::format("recommended delta_t: [{}, {}] s\n", format_seconds(r.low), format_seconds(r.high));
  }
  out << fmt::format("wrote {} and {}\n", (dir / "events.txt").string(), (dir / "truth.csv").string());
  return 0;
}

}  // namespace

void RunConfig::set(std::string_view raw_key, std::string_view value) {
  // Config files may spell keys with underscores.
  std::string key(raw_key);
  std::replace(key.begin(), key.end(), '_', '-');
  const std::string v(value);
  if (key == "input") {
    input = v;
  } else if (key == "synth-preset") {
    synth_preset = v;
  } else if (key == "synth-config") {
    synth_config = v;
  } else if (key == "samples") {
    samples = static_cast<std::size_t>(parse_count(key, value));
  } else if (key == "delta-t") {
    if (value == "auto")
      delta_t.reset();
    else
      delta_t = parse_number(key, value);
  } else if (key == "train-fraction") {
    train_fraction = parse_number(key, value);
  } else if (key == "paradigms") {
    paradigms.clear();
    std::string_view rest = value;
    while (!rest.empty()) {
      const auto comma = rest.find(',');
      const auto token = rest.substr(0, comma);
      const auto p = parse_paradigm(token);
      if (!p) usage(fmt::format("unknown paradigm '{}' (expected p1, p2, p3, hybrid)", token));
      if (std::find(paradigms.begin(), paradigms.end(), *p) == paradigms.end()) paradigms.push_back(*p);
      rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
    }
    if (paradigms.empty()) usage("paradigms list is empty");
  } else if (key == "rules") {
    rules = v;
  } else if (key == "alpha") {
    alpha = parse_number(key, value);
  } else if (key == "out") {
    out = v;
  } else if (key == "seed") {
    seed = parse_count(key, value);
  } else if (key == "model") {
    model = v;
  } else if (key == "skip-malformed") {
    if (value == "true" || value == "1" || value == "on")
      skip_malformed = true;
    else if (value == "false" || value == "0" || value == "off")
      skip_malformed = false;
    else
      usage("skip-malformed must be true or false");
  } else if (key == "latch-mode") {
    if (value == "latch")
      latch_mode = LatchMode::Latch;
    else if (value == "pulse")
      latch_mode = LatchMode::Pulse;
    else
      usage("latch-mode must be latch or pulse");
  } else {
    usage(fmt::format("unknown setting '{}'", key));
  }
}

void RunConfig::check() const {
  const int sources = (input ? 1 : 0) + ((synth_preset || synth_config) ? 1 : 0);
  if (sources != 1) usage("give exactly one input source: --input or --synth-preset/--synth-config");
  if (delta_t && !(*delta_t > 0)) usage(fmt::format("delta-t must be positive, got {}", *delta_t));
  if (!(train_fraction > 0 && train_fraction < 1))
    usage(fmt::format("train-fraction must lie in (0, 1), got {}", train_fraction));
  if (!(alpha >= 0)) usage(fmt::format("alpha must be >= 0, got {}", alpha));
}

std::vector<std::pair<std::string, std::string>> RunConfig::echo() const {
  std::vector<std::pair<std::string, std::string>> kv;
  if (input) kv.emplace_back("input", *input);
  if (synth_preset) kv.emplace_back("synth-preset", *synth_preset);
  if (synth_config) kv.emplace_back("synth-config", *synth_config);
  if (samples) kv.emplace_back("samples", std::to_string(*samples));
  kv.emplace_back("delta-t", delta_t ? fmt::format("{:.17g}", *delta_t) : "auto");
  kv.emplace_back("train-fraction", fmt::format("{:.17g}", train_fraction));
  std::string list;
  for (auto p : paradigms) list += (list.empty() ? "" : ",") + std::string(paradigm_key(p));
  kv.emplace_back("paradigms", list);
  kv.emplace_back("rules", rules ? *rules : "default");
  kv.emplace_back("alpha", fmt::format("{:.17g}", alpha));
  kv.emplace_back("seed", std::to_string(seed));
  if (model) kv.emplace_back("model", *model);
  kv.emplace_back("skip-malformed", skip_malformed ? "true" : "false");
  kv.emplace_back("latch-mode", latch_mode == LatchMode::Latch ? "latch" : "pulse");
  return kv;
}

std::vector<std::pair<std::string, std::string>> parse_key_values(std::string_view text) {
  std::vector<std::pair<std::string, std::string>> out;
  std::size_t pos = 0;
  std::size_t line_number = 0;
  auto strip = [](std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return std::string_view{};
    return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
  };
  while (pos < text.size()) {
    auto eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    auto line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_number;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = strip(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) usage(fmt::format("config line {}: expected key=value", line_number));
    out.emplace_back(std::string(strip(line.substr(0, eq))), std::string(strip(line.substr(eq + 1))));
  }
  return out;
}

int exit_code_for(const std::exception& e) {
  if (const auto* err = dynamic_cast<const Error*>(&e)) {
    switch (err->code()) {
      case ErrorCode::Usage: return 1;
      case ErrorCode::InvariantViolation: return 3;
      default: return 2;
    }
  }
  return 3;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Discrete HMM activity recognition with annotation-gap handling paradigms", "gapmark"};
  app.require_subcommand(1);

  static const std::vector<std::pair<std::string, std::string>> flags = {
      {"input", "Raw event log, or a samples CSV written by ingest"},
      {"synth-preset", "Synthetic input preset: aruba-like | small"},
      {"synth-config", "Synthetic input key=value file"},
      {"samples", "Synthetic input length in samples"},
      {"delta-t", "Resampling interval in seconds, or auto (default 7)"},
      {"train-fraction", "Chronological training share (default 0.6)"},
      {"paradigms", "Comma list of p1,p2,p3,hybrid (default all)"},
      {"rules", "Semantic rule file for the hybrid paradigm"},
      {"alpha", "Additive smoothing (default 0.01)"},
      {"out", "Output directory (default $GAPMARK_OUT, else .)"},
      {"seed", "Seed for synthetic inputs (default 1)"},
      {"model", "Model file to evaluate instead of training"},
      {"latch-mode", "latch | pulse"},
  };
  std::map<std::string, std::string> values;
  std::string config_file;
  bool skip_malformed = false;

  const std::vector<std::pair<std::string, std::string>> commands = {
      {"ingest", "Resample an event log and write samples.csv with dataset statistics"},
      {"train", "Train one model per paradigm on the training split"},
      {"evaluate", "Compare paradigms (or score --model) on the test split and write reports"},
      {"synth", "Generate a synthetic event log and its ground truth"},
  };
  std::vector<CLI::App*> subs;
  std::vector<std::pair<std::string, CLI::Option*>> bound;
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    for (const auto& [flag, flag_help] : flags) bound.emplace_back(flag, sub->add_option("--" + flag, values[flag], flag_help));
    sub->add_option("--config", config_file, "key=value file with the same keys as the flags");
    sub->add_flag("--skip-malformed", skip_malformed, "Skip malformed event lines instead of failing");
    subs.push_back(sub);
  }

  std::vector<const char*> argv;
  argv.push_back("gapmark");
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  try {
    RunConfig config;
    if (const char* env = std::getenv("GAPMARK_OUT"); env && *env) config.out = env;
    if (!config_file.empty())
      for (const auto& [k, v] : parse_key_values(read_file(config_file))) config.set(k, v);
    for (const auto& [flag, option] : bound)
      if (option->count() > 0) config.set(flag, values[flag]);
    if (skip_malformed) config.skip_malformed = true;

    CLI::App* chosen = nullptr;
    for (auto* sub : subs)
      if (sub->parsed()) chosen = sub;
    const std::string command = chosen->get_name();
    if (command != "synth") config.check();
    if (command == "synth" && !config.synth_preset && !config.synth_config) usage("synth needs --synth-preset or --synth-config");

    if (command == "ingest") return cmd_ingest(config, out);
    if (command == "train") return cmd_train(config, out);
    if (command == "evaluate") return cmd_evaluate(config, out);
    return cmd_synth(config, out);
  } catch (const std::exception& e) {
    err << "gapmark: " << e.what() << '\n';
    return exit_code_for(e);
  }
}

}  // namespace gapmark

#include "gapmark/hmm.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include <fmt/format.h>

#include "gapmark/error.hpp"

namespace gapmark {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// True when `v` is larger than `best` by more than rounding noise. Paths that
// tie in exact arithmetic (a cycle shifted inside a run of equal symbols) can
// come out a few ulps apart depending on summation order.
inline bool beats(double v, double best) {
  return v > best && v - best > kTieTolerance * std::max(1.0, std::abs(v));
}

double safe_log(double p) { return p > 0 ? std::log(p) : kNegInf; }

// Normalizes counts + alpha into `row`; returns false when the row had no mass.
bool normalize_row(std::span<const double> counts, double alpha, std::span<double> row) {
  double total = alpha * static_cast<double>(counts.size());
  for (double c : counts) total += c;
  if (total <= 0) {
    std::fill(row.begin(), row.end(), 1.0 / static_cast<double>(row.size()));
    return false;
  }
  for (std::size_t k = 0; k < counts.size(); ++k) row[k] = (counts[k] + alpha) / total;
  return true;
}

struct LogTables {
  std::size_t n = 0;
  std::size_t m = 0;
  std::vector<double> initial;
  std::vector<double> transition_t;  // [to * n + from]
  std::vector<double> emission;      // [state * m + symbol]

  explicit LogTables(const HmmModel& model) : n(model.state_count()), m(model.symbol_count()) {
    initial.resize(n);
    transition_t.resize(n * n);
    emission.resize(model.emission.size());
    for (std::size_t i = 0; i < n; ++i) initial[i] = safe_log(model.initial[i]);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) transition_t[j * n + i] = safe_log(model.a(i, j));
    for (std::size_t k = 0; k < emission.size(); ++k) emission[k] = safe_log(model.emission[k]);
  }

  double a(std::size_t from, std::size_t to) const { return transition_t[to * n + from]; }
  double b(std::size_t state, std::size_t symbol) const { return emission[state * m + symbol]; }
};

void check_symbols(const HmmModel& model, std::span<const std::size_t> symbols) {
  if (symbols.empty()) throw Error(ErrorCode::EmptyObservations, "observation sequence is empty");
  if (model.state_count() == 0) throw Error(ErrorCode::CorruptModel, "model has no states");
  for (auto s : symbols)
    if (s >= model.symbol_count())
      throw Error(ErrorCode::InvalidConfig, fmt::format("symbol {} outside alphabet of {}", s, model.symbol_count()));
}

}  // namespace

std::size_t HmmModel::symbol_of(ObservationCode code) const {
  const auto it = std::lower_bound(alphabet.begin(), alphabet.end(), code);
  if (it == alphabet.end() || *it != code) return unseen_symbol();
  return static_cast<std::size_t>(it - alphabet.begin());
}

std::vector<std::size_t> HmmModel::symbols_of(std::span<const ObservationCode> codes) const {
  std::vector<std::size_t> out;
  out.reserve(codes.size());
  for (auto code : codes) out.push_back(symbol_of(code));
  return out;
}

void HmmModel::validate() const {
  const std::size_t n = state_count();
  const std::size_t m = symbol_count();
  auto fail = [](const std::string& what) { throw Error(ErrorCode::InvariantViolation, what); };
  if (n == 0) fail("model has no states");
  if (initial.size() != n || transition.size() != n * n || emission.size() != n * m)
    fail(fmt::format("table shapes do not match {} states x {} symbols", n, m));

  auto check_row = [&](std::span<const double> row, const std::string& name) {
    double sum = 0;
    for (double p : row) {
      if (!(p >= 0.0 && p <= 1.0)) fail(fmt::format("{} has entry {} outside [0, 1]", name, p));
      sum += p;
    }
    if (std::abs(sum - 1.0) > kStochasticTolerance) fail(fmt::format("{} sums to {:.17g}", name, sum));
  };
  check_row(initial, "pi");
  for (std::size_t i = 0; i < n; ++i) {
    check_row(std::span(transition).subspan(i * n, n), fmt::format("A row {}", i));
    check_row(std::span(emission).subspan(i * m, m), fmt::format("B row {}", i));
  }

  auto sorted_states = states;
  std::sort(sorted_states.begin(), sorted_states.end());
  if (std::adjacent_find(sorted_states.begin(), sorted_states.end()) != sorted_states.end())
    fail("duplicate state label");
  for (std::size_t k = 1; k < alphabet.size(); ++k)
    if (!(alphabet[k - 1] < alphabet[k])) fail("alphabet is not strictly increasing");
}

HmmModel estimate(const SampleSeries& series, const LabelSpace& space, double alpha) {
  if (!(alpha >= 0.0) || !std::isfinite(alpha))
    throw Error(ErrorCode::InvalidSmoothing, fmt::format("smoothing must be a finite value >= 0, got {}", alpha));
  if (series.samples.empty()) throw Error(ErrorCode::EmptySeries, "cannot estimate from an empty series");

  HmmModel model;
  model.states = space.states();
  model.smoothing_alpha = alpha;
  model.delta_t_seconds = series.delta_t.seconds();
  model.sensor_count = series.sensor_count;
  model.paradigm = std::string(paradigm_key(space.paradigm));
  for (const auto& s : series.samples) model.alphabet.push_back(s.code);
  std::sort(model.alphabet.begin(), model.alphabet.end());
  model.alphabet.erase(std::unique(model.alphabet.begin(), model.alphabet.end()), model.alphabet.end());

  const std::size_t n = model.state_count();
  const std::size_t m = model.symbol_count();
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < n; ++i) index.emplace(model.states[i], i);

  std::vector<std::size_t> state_seq(series.samples.size());
  const std::string* cached_label = nullptr;
  std::size_t cached_index = 0;
  for (std::size_t t = 0; t < series.samples.size(); ++t) {
    const auto& label = series.samples[t].label;
    if (!label)
      throw Error(ErrorCode::NullLabelPresent,
                  fmt::format("sample {} at {} is an annotation gap; apply a paradigm first", t,
                              format_timestamp(series.samples[t].time)));
    if (!cached_label || *cached_label != *label) {
      const auto it = index.find(*label);
      if (it == index.end()) throw Error(ErrorCode::LabelNotInSpace, fmt::format("label '{}' is not a state", *label));
      cached_label = &*label;
      cached_index = it->second;
    }
    state_seq[t] = cached_index;
  }

  std::vector<double> pi_counts(n, 0.0);
  std::vector<double> a_counts(n * n, 0.0);
  std::vector<double> b_counts(n * m, 0.0);
  for (std::size_t t = 0; t < state_seq.size(); ++t) {
    const auto& sample = series.samples[t];
    const std::size_t q = state_seq[t];
    if (t == 0 || day_index(sample.time) != day_index(series.samples[t - 1].time)) pi_counts[q] += 1;
    if (t > 0) a_counts[state_seq[t - 1] * n + q] += 1;
    b_counts[q * m + model.symbol_of(sample.code)] += 1;
  }

  model.initial.resize(n);
  model.transition.resize(n * n);
  model.emission.resize(n * m);
  normalize_row(pi_counts, alpha, model.initial);
  for (std::size_t i = 0; i < n; ++i) {
    const bool a_ok = normalize_row(std::span(a_counts).subspan(i * n, n), alpha,
                                    std::span(model.transition).subspan(i * n, n));
    const bool b_ok = normalize_row(std::span(b_counts).subspan(i * m, m), alpha,
                                    std::span(model.emission).subspan(i * m, m));
    if (!a_ok || !b_ok) model.fallback_rows.push_back(i);
  }
  model.validate();
  return model;
}

DecodedPath viterbi_decode(const HmmModel& model, std::span<const std::size_t> symbols) {
  check_symbols(model, symbols);
  const std::size_t n = model.state_count();
  const std::size_t steps = symbols.size();
  if (n > std::numeric_limits<std::uint16_t>::max() + std::size_t{1})
    throw Error(ErrorCode::InstanceTooLarge, fmt::format("{} states exceed the backpointer width", n));
  const LogTables logs(model);

  std::vector<double> score(n);
  std::vector<double> next(n);
  std::vector<std::uint16_t> back(steps * n, 0);

  for (std::size_t j = 0; j < n; ++j) score[j] = logs.initial[j] + logs.b(j, symbols[0]);

  auto all_impossible = [](const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return x == kNegInf; });
  };
  if (all_impossible(score)) throw Error(ErrorCode::ImpossibleSequence, "observation 0 has zero probability in every state");

  for (std::size_t t = 1; t < steps; ++t) {
    std::uint16_t* back_t = back.data() + t * n;
    const std::size_t symbol = symbols[t];
    for (std::size_t j = 0; j < n; ++j) {
      const double* column = logs.transition_t.data() + j * n;
      double best = kNegInf;
      std::size_t arg = 0;
      for (std::size_t i = 0; i < n; ++i) {
        const double v = score[i] + column[i];
        if (beats(v, best)) {
          best = v;
          arg = i;
        }
      }
      next[j] = best + logs.b(j, symbol);
      back_t[j] = static_cast<std::uint16_t>(arg);
    }
    score.swap(next);
    if (all_impossible(score))
      throw Error(ErrorCode::ImpossibleSequence, fmt::format("no state sequence explains observation {}", t));
  }

  DecodedPath path;
  path.states.resize(steps);
  std::size_t state = 0;
  for (std::size_t j = 1; j < n; ++j)
    if (beats(score[j], score[state])) state = j;
  path.log_probability = score[state];
  for (std::size_t t = steps; t-- > 0;) {
    path.states[t] = state;
    if (t > 0) state = back[t * n + state];
  }
  return path;
}

DecodedPath viterbi_decode(const HmmModel& model, std::span<const ObservationCode> codes) {
  const auto symbols = model.symbols_of(codes);
  return viterbi_decode(model, symbols);
}

DecodedPath brute_force_decode(const HmmModel& model, std::span<const std::size_t> symbols) {
  check_symbols(model, symbols);
  const std::size_t n = model.state_count();
  const std::size_t steps = symbols.size();
  if (std::pow(static_cast<double>(n), static_cast<double>(steps)) > kBruteForceLimit)
    throw Error(ErrorCode::InstanceTooLarge, fmt::format("{}^{} paths exceed the enumeration guard", n, steps));
  const LogTables logs(model);

  // Odometer with the first position fastest: the last position is the most
  // significant digit, so the first maximum met is the smallest path read
  // backwards from the end, matching Viterbi's lowest-index tie rule.
  std::vector<std::size_t> path(steps, 0);
  DecodedPath best{path, kNegInf};
  bool found = false;
  while (true) {
    double s = logs.initial[path[0]] + logs.b(path[0], symbols[0]);
    for (std::size_t t = 1; t < steps; ++t) {
      s = s + logs.a(path[t - 1], path[t]);
      s = s + logs.b(path[t], symbols[t]);
    }
    if (beats(s, best.log_probability)) {
      best.states = path;
      best.log_probability = s;
      found = true;
    }
    std::size_t pos = 0;
    while (pos < steps && ++path[pos] == n) path[pos++] = 0;
    if (pos == steps) break;
  }
  if (!found) throw Error(ErrorCode::ImpossibleSequence, "every path has zero probability");
  return best;
}

double sequence_log_likelihood(const HmmModel& model, std::span<const std::size_t> symbols) {
  check_symbols(model, symbols);
  // Scaled forward recursion: each step's mass is renormalized to 1 and its
  // log accumulated, so long sequences never underflow.
  const std::size_t n = model.state_count();
  std::vector<double> transition_t(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) transition_t[j * n + i] = model.a(i, j);

  std::vector<double> forward(n);
  std::vector<double> next(n);
  double log_likelihood = 0;
  auto rescale = [&](std::vector<double>& v) {
    double mass = 0;
    for (double x : v) mass += x;
    if (mass <= 0) return false;
    for (double& x : v) x /= mass;
    log_likelihood += std::log(mass);
    return true;
  };

  for (std::size_t j = 0; j < n; ++j) forward[j] = model.initial[j] * model.b(j, symbols[0]);
  if (!rescale(forward)) return kNegInf;
  for (std::size_t t = 1; t < symbols.size(); ++t) {
    for (std::size_t j = 0; j < n; ++j) {
      const double* column = transition_t.data() + j * n;
      double sum = 0;
      for (std::size_t i = 0; i < n; ++i) sum += forward[i] * column[i];
      next[j] = sum * model.b(j, symbols[t]);
    }
    forward.swap(next);
    if (!rescale(forward)) return kNegInf;
  }
  return log_likelihood;
}

double sequence_log_likelihood(const HmmModel& model, std::span<const ObservationCode> codes) {
  const auto symbols = model.symbols_of(codes);
  return sequence_log_likelihood(model, symbols);
}

double path_log_probability(const HmmModel& model, std::span<const std::size_t> path,
                            std::span<const std::size_t> symbols) {
  check_symbols(model, symbols);
  if (path.size() != symbols.size())
    throw Error(ErrorCode::LengthMismatch, fmt::format("path length {} vs {} observations", path.size(), symbols.size()));
  const LogTables logs(model);
  double s = logs.initial[path[0]] + logs.b(path[0], symbols[0]);
  for (std::size_t t = 1; t < path.size(); ++t) {
    s = s + logs.a(path[t - 1], path[t]);
    s = s + logs.b(path[t], symbols[t]);
  }
  return s;
}

// ---------------------------------------------------------------------------
// Model file

void save_model(const HmmModel& model, std::ostream& out) {
  const std::size_t n = model.state_count();
  const std::size_t m = model.symbol_count();
  out << "# gapmark discrete HMM\n";
  out << fmt::format("format_version {}\n", kModelFormatVersion);
  out << fmt::format("n_states {}\n", n);
  out << fmt::format("n_symbols {}\n", m);
  out << fmt::format("delta_t {:.17g}\n", model.delta_t_seconds);
  out << fmt::format("paradigm {}\n", model.paradigm.empty() ? "-" : model.paradigm);
  out << fmt::format("alpha {:.17g}\n", model.smoothing_alpha);
  out << fmt::format("sensor_count {}\n", model.sensor_count);
  out << fmt::format("training_digest {}\n", model.training_digest.empty() ? "-" : model.training_digest);
  out << "fallback_rows " << model.fallback_rows.size();
  for (auto r : model.fallback_rows) out << ' ' << r;
  out << '\n';
  for (const auto& s : model.states) out << "state " << s << '\n';
  for (auto code : model.alphabet) out << "code " << code_hex(code, model.sensor_count) << '\n';
  auto write_row = [&](const char* tag, std::span<const double> row) {
    out << tag;
    for (double p : row) out << fmt::format(" {:.17g}", p);
    out << '\n';
  };
  write_row("pi", model.initial);
  for (std::size_t i = 0; i < n; ++i) write_row("A", std::span(model.transition).subspan(i * n, n));
  for (std::size_t i = 0; i < n; ++i) write_row("B", std::span(model.emission).subspan(i * m, m));
}

namespace {

class ModelReader {
 public:
  explicit ModelReader(std::istream& in) : in_(in) {}

  // Next non-comment line split into tag and remainder.
  std::pair<std::string, std::string> next(std::string_view expected) {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_number_;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty() || line.front() == '#') continue;
      const auto space = line.find(' ');
      std::string tag = line.substr(0, space);
      std::string rest = space == std::string::npos ? std::string() : line.substr(space + 1);
      if (tag != expected) corrupt(fmt::format("expected '{}', found '{}'", expected, tag));
      return {std::move(tag), std::move(rest)};
    }
    corrupt(fmt::format("unexpected end of file, expected '{}'", expected));
  }

  [[noreturn]] void corrupt(const std::string& why) const {
    throw Error(ErrorCode::CorruptModel, fmt::format("line {}: {}", line_number_, why));
  }

  std::size_t size_value(std::string_view tag) {
    const auto [t, rest] = next(tag);
    std::istringstream ss(rest);
    std::size_t v = 0;
    if (!(ss >> v)) corrupt(fmt::format("bad integer for '{}'", tag));
    return v;
  }

  double double_value(std::string_view tag) {
    const auto [t, rest] = next(tag);
    return parse_double(rest);
  }

  std::vector<double> row(std::string_view tag, std::size_t count) {
    const auto [t, rest] = next(tag);
    std::istringstream ss(rest);
    std::vector<double> values;
    values.reserve(count);
    std::string token;
    while (ss >> token) values.push_back(parse_double(token));
    if (values.size() != count) corrupt(fmt::format("'{}' row has {} entries, expected {}", tag, values.size(), count));
    return values;
  }

  double parse_double(const std::string& text) const {
    char* end = nullptr;
    const double v = std::strtod(text.c_str(), &end);
    if (end == text.c_str() || *end != '\0' || !std::isfinite(v)) corrupt(fmt::format("bad number '{}'", text));
    return v;
  }

 private:
  std::istream& in_;
  std::size_t line_number_ = 0;
};

}  // namespace

HmmModel load_model(std::istream& in) {
  ModelReader reader(in);
  const auto version = static_cast<int>(reader.size_value("format_version"));
  if (version != kModelFormatVersion)
    throw Error(ErrorCode::VersionMismatch,
                fmt::format("model format version {} is not supported (expected {})", version, kModelFormatVersion));

  HmmModel model;
  const std::size_t n = reader.size_value("n_states");
  const std::size_t m = reader.size_value("n_symbols");
  if (n == 0 || m == 0) reader.corrupt("model needs at least one state and one symbol");
  model.delta_t_seconds = reader.double_value("delta_t");
  model.paradigm = reader.next("paradigm").second;
  if (model.paradigm == "-") model.paradigm.clear();
  model.smoothing_alpha = reader.double_value("alpha");
  model.sensor_count = reader.size_value("sensor_count");
  model.training_digest = reader.next("training_digest").second;
  if (model.training_digest == "-") model.training_digest.clear();
  {
    std::istringstream ss(reader.next("fallback_rows").second);
    std::size_t count = 0;
    ss >> count;
    for (std::size_t i = 0; i < count; ++i) {
      std::size_t r = 0;
      if (!(ss >> r) || r >= n) reader.corrupt("bad fallback row index");
      model.fallback_rows.push_back(r);
    }
  }
  for (std::size_t i = 0; i < n; ++i) model.states.push_back(reader.next("state").second);
  for (std::size_t k = 0; k + 1 < m; ++k) {
    const auto code = parse_code_hex(reader.next("code").second);
    if (!code) reader.corrupt("bad observation code");
    model.alphabet.push_back(*code);
  }
  model.initial = reader.row("pi", n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = reader.row("A", n);
    model.transition.insert(model.transition.end(), row.begin(), row.end());
  }
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = reader.row("B", m);
    model.emission.insert(model.emission.end(), row.begin(), row.end());
  }
  try {
    model.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::CorruptModel, e.what());
  }
  return model;
}

}  // namespace gapmark

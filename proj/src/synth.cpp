#include "gapmark/synth.hpp"

#include <algorithm>
#include <cmath>
#include <bit>
#include <random>
#include <span>
#include <set>

#include <fmt/format.h>

#include "gapmark/error.hpp"

namespace gapmark {
namespace {

[[noreturn]] void invalid(const std::string& why) { throw Error(ErrorCode::InvalidConfig, why); }

std::discrete_distribution<std::size_t> make_categorical(const std::vector<double>& weights) {
  return std::discrete_distribution<std::size_t>(weights.begin(), weights.end());
}

struct Regime {
  bool gap = false;
  std::size_t a = 0;  // activity, or preceding activity for gaps
  std::size_t b = 0;  // following activity for gaps
  friend bool operator==(const Regime&, const Regime&) = default;
};

struct Run {
  std::size_t activity;
  std::size_t first;
  std::size_t last;  // inclusive
};

// Kind orders events that share a timestamp: sensor changes first, then
// re-reports that carry annotation markers.
struct PendingEvent {
  Timestamp time;
  int kind = 0;  // 0 toggle, 1 re-report
  std::size_t sensor = 0;
  SensorValue value = SensorValue::Inactive;
  std::optional<Annotation> annotation;
};

}  // namespace

void SynthConfig::validate() const {
  const std::size_t n = activities.size();
  if (n == 0) invalid("no activities");
  if (sensor_ids.empty() || sensor_ids.size() > kMaxSensors)
    invalid(fmt::format("sensor count must lie in [1, {}], got {}", kMaxSensors, sensor_ids.size()));
  if (std::set<std::string>(sensor_ids.begin(), sensor_ids.end()).size() != sensor_ids.size())
    invalid("duplicate sensor id");
  if (std::set<std::string>(activities.begin(), activities.end()).size() != n) invalid("duplicate activity");
  if (initial.size() != n || transition.size() != n * n || emissions.size() != n)
    invalid("generator tables do not match the activity count");

  auto check_row = [](std::span<const double> row, const std::string& what) {
    double sum = 0;
    for (double p : row) {
      if (!(p >= 0 && p <= 1)) invalid(fmt::format("{} has entry {} outside [0, 1]", what, p));
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9) invalid(fmt::format("{} sums to {}", what, sum));
  };
  check_row(initial, "initial distribution");
  for (std::size_t i = 0; i < n; ++i)
    check_row(std::span(transition).subspan(i * n, n), fmt::format("transition row {}", activities[i]));

  const std::uint64_t width_mask =
      sensor_ids.size() == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << sensor_ids.size()) - 1;
  auto check_distribution = [&](const CodeDistribution& d, const std::string& what) {
    if (d.codes.empty() || d.codes.size() != d.weights.size()) invalid(fmt::format("{} is empty or ragged", what));
    double total = 0;
    for (std::size_t k = 0; k < d.codes.size(); ++k) {
      if (!(d.weights[k] >= 0) || !std::isfinite(d.weights[k])) invalid(fmt::format("{} has a bad weight", what));
      if (d.codes[k].bits & ~width_mask) invalid(fmt::format("{} uses a bit beyond the sensor count", what));
      total += d.weights[k];
    }
    if (total <= 0) invalid(fmt::format("{} has no mass", what));
  };
  for (std::size_t i = 0; i < n; ++i) check_distribution(emissions[i], fmt::format("profile of {}", activities[i]));
  for (const auto& [pair, d] : signatures) {
    if (pair.first >= n || pair.second >= n) invalid("gap signature names an unknown activity");
    check_distribution(d, "gap signature");
  }

  if (!(gap_fraction >= 0 && gap_fraction < 1)) invalid(fmt::format("gap fraction must lie in [0, 1), got {}", gap_fraction));
  for (const auto& [name, f] : tail_gap_fraction) {
    if (std::find(activities.begin(), activities.end(), name) == activities.end())
      invalid(fmt::format("tail gap override for unknown activity '{}'", name));
    if (!(f >= 0 && f < 1)) invalid(fmt::format("tail gap fraction for {} must lie in [0, 1)", name));
  }
  if (!(code_hold >= 0 && code_hold < 1)) invalid(fmt::format("code hold must lie in [0, 1), got {}", code_hold));
  if (delta_t.micros < 4) invalid("delta_t too small");
  if (samples == 0) invalid("samples must be positive");
}

SynthOutput generate(const SynthConfig& config) {
  config.validate();
  const std::size_t n = config.activities.size();
  const std::size_t ticks = config.samples;
  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  // 1. Ground-truth activity per tick.
  std::vector<std::discrete_distribution<std::size_t>> next_activity;
  for (std::size_t i = 0; i < n; ++i)
    next_activity.push_back(make_categorical(
        std::vector<double>(config.transition.begin() + static_cast<std::ptrdiff_t>(i * n),
                            config.transition.begin() + static_cast<std::ptrdiff_t>((i + 1) * n))));
  auto first_activity = make_categorical(config.initial);
  std::vector<std::size_t> truth(ticks);
  truth[0] = first_activity(rng);
  for (std::size_t k = 1; k < ticks; ++k) truth[k] = next_activity[truth[k - 1]](rng);

  std::vector<Run> runs;
  for (std::size_t k = 0; k < ticks; ++k) {
    if (runs.empty() || runs.back().activity != truth[k])
      runs.push_back({truth[k], k, k});
    else
      runs.back().last = k;
  }

  // 2. Annotated pieces of every run.
  std::vector<char> annotated(ticks, 1);
  for (const auto& run : runs) {
    const std::size_t length = run.last - run.first + 1;
    const auto override_it = config.tail_gap_fraction.find(config.activities[run.activity]);
    std::size_t head = 0;
    std::size_t tail = 0;
    if (override_it != config.tail_gap_fraction.end()) {
      tail = static_cast<std::size_t>(override_it->second * static_cast<double>(length));
    } else if (config.placement == GapPlacement::Boundary) {
      const auto erased = static_cast<std::size_t>(config.gap_fraction * static_cast<double>(length));
      head = erased / 2;
      tail = erased - head;
    } else {
      const auto erased = static_cast<std::size_t>(config.gap_fraction * static_cast<double>(length));
      if (erased > 0) {
        std::uniform_int_distribution<std::size_t> offset(0, length - erased);
        const std::size_t at = run.first + offset(rng);
        std::fill(annotated.begin() + static_cast<std::ptrdiff_t>(at),
                  annotated.begin() + static_cast<std::ptrdiff_t>(at + erased), 0);
      }
    }
    if (head + tail >= length) tail = length - 1 - head;
    std::fill(annotated.begin() + static_cast<std::ptrdiff_t>(run.first),
              annotated.begin() + static_cast<std::ptrdiff_t>(run.first + head), 0);
    std::fill(annotated.begin() + static_cast<std::ptrdiff_t>(run.last + 1 - tail),
              annotated.begin() + static_cast<std::ptrdiff_t>(run.last + 1), 0);
  }

  // 3. Regime per tick: the activity profile, or the signature of the gap's
  //    annotated neighbours.
  std::vector<Regime> regime(ticks);
  for (std::size_t k = 0; k < ticks; ++k) regime[k] = {false, truth[k], truth[k]};
  if (config.pair_signatures) {
    std::size_t k = 0;
    while (k < ticks) {
      if (annotated[k]) {
        ++k;
        continue;
      }
      std::size_t end = k;
      while (end < ticks && !annotated[end]) ++end;
      if (k > 0 && end < ticks) {
        const std::pair key{truth[k - 1], truth[end]};
        if (config.signatures.contains(key))
          for (std::size_t t = k; t < end; ++t) regime[t] = {true, key.first, key.second};
      }
      k = end;
    }
  }

  // 4. Codes.
  std::vector<std::discrete_distribution<std::size_t>> profile_draw;
  for (const auto& d : config.emissions) profile_draw.push_back(make_categorical(d.weights));
  std::map<std::pair<std::size_t, std::size_t>, std::discrete_distribution<std::size_t>> signature_draw;
  for (const auto& [key, d] : config.signatures) signature_draw.emplace(key, make_categorical(d.weights));
  auto draw = [&](const Regime& r) {
    if (r.gap) {
      const auto& d = config.signatures.at({r.a, r.b});
      return d.codes[signature_draw.at({r.a, r.b})(rng)];
    }
    return config.emissions[r.a].codes[profile_draw[r.a](rng)];
  };
  std::vector<ObservationCode> codes(ticks);
  codes[0] = draw(regime[0]);
  for (std::size_t k = 1; k < ticks; ++k) {
    if (regime[k] == regime[k - 1] && unit(rng) < config.code_hold)
      codes[k] = codes[k - 1];
    else
      codes[k] = draw(regime[k]);
  }

  // 5. Events. Every sensor reports at t0, so first-appearance order equals
  //    sensor_ids order. Changes for tick k land strictly inside (t_{k-1}, t_k).
  const std::size_t m = config.sensor_ids.size();
  const std::int64_t dt = config.delta_t.micros;
  auto tick_time = [&](std::size_t k) { return config.start + Duration{static_cast<std::int64_t>(k) * dt}; };
  std::vector<PendingEvent> pending;
  pending.reserve(ticks + m);
  for (std::size_t s = 0; s < m; ++s)
    pending.push_back({tick_time(0), 0, s, (codes[0].bits >> s) & 1 ? SensorValue::Active : SensorValue::Inactive, {}});
  std::uniform_int_distribution<std::int64_t> offset(1, dt - 1);
  for (std::size_t k = 1; k < ticks; ++k) {
    std::uint64_t changed = codes[k].bits ^ codes[k - 1].bits;
    while (changed) {
      const auto s = static_cast<std::size_t>(std::countr_zero(changed));
      changed &= changed - 1;
      pending.push_back({tick_time(k - 1) + Duration{offset(rng)}, 0, s,
                         (codes[k].bits >> s) & 1 ? SensorValue::Active : SensorValue::Inactive, {}});
    }
  }
  for (std::size_t k = 0; k < ticks;) {
    if (!annotated[k]) {
      ++k;
      continue;
    }
    std::size_t end = k;
    while (end + 1 < ticks && annotated[end + 1] && truth[end + 1] == truth[k]) ++end;
    const auto& name = config.activities[truth[k]];
    pending.push_back({tick_time(k), 1, 0, SensorValue::Inactive, Annotation{name, Marker::Begin}});
    pending.push_back({tick_time(end) + Duration{dt / 2}, 1, 0, SensorValue::Inactive, Annotation{name, Marker::End}});
    k = end + 1;
  }
  pending.push_back({tick_time(ticks - 1), 1, 0, SensorValue::Inactive, {}});

  std::stable_sort(pending.begin(), pending.end(), [](const PendingEvent& a, const PendingEvent& b) {
    return a.time != b.time ? a.time < b.time : a.kind < b.kind;
  });

  SynthOutput out;
  out.stream.events.reserve(pending.size());
  std::uint64_t latched = 0;
  for (auto& p : pending) {
    const std::uint64_t mask = std::uint64_t{1} << p.sensor;
    if (p.kind == 0) {
      latched = p.value == SensorValue::Active ? (latched | mask) : (latched & ~mask);
    } else {
      p.value = (latched & mask) ? SensorValue::Active : SensorValue::Inactive;
    }
    out.stream.events.push_back({p.time, config.sensor_ids[p.sensor], p.value, std::move(p.annotation)});
  }
  out.stream.source_digest = sha256_hex(serialize_stream(out.stream));

  // 6. Resample through the ordinary pipeline and check the round trip.
  const auto map = SensorMap::from_stream(out.stream);
  out.gapped = assign_labels(resample(out.stream, map, config.delta_t), build_annotation_intervals(out.stream));
  if (out.gapped.size() != ticks)
    throw Error(ErrorCode::InvariantViolation,
                fmt::format("resampled {} ticks, generated {}", out.gapped.size(), ticks));
  out.truth = out.gapped;
  for (std::size_t k = 0; k < ticks; ++k) {
    if (out.gapped.samples[k].code != codes[k])
      throw Error(ErrorCode::InvariantViolation, fmt::format("tick {} code does not survive resampling", k));
    const bool labeled = out.gapped.samples[k].label.has_value();
    if (labeled != static_cast<bool>(annotated[k]) ||
        (labeled && *out.gapped.samples[k].label != config.activities[truth[k]]))
      throw Error(ErrorCode::InvariantViolation, fmt::format("tick {} annotation does not survive resampling", k));
    out.truth.samples[k].label = config.activities[truth[k]];
  }
  return out;
}

namespace {

ObservationCode bits_of(std::initializer_list<std::size_t> sensors) {
  std::uint64_t bits = 0;
  for (auto s : sensors) bits |= std::uint64_t{1} << s;
  return ObservationCode{bits};
}

// Resting code (the zone's first sensor latched on) plus single sensors and
// random pairs drawn from `zone`.
CodeDistribution zone_profile(const std::vector<std::size_t>& zone, double quiet, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> weight(0.5, 1.5);
  CodeDistribution d;
  std::vector<std::pair<ObservationCode, double>> raw;
  for (auto s : zone) raw.push_back({bits_of({s}), weight(rng)});
  std::uniform_int_distribution<std::size_t> pick(0, zone.size() - 1);
  for (std::size_t i = 0; i < zone.size(); ++i) {
    const auto a = zone[pick(rng)];
    const auto b = zone[pick(rng)];
    if (a != b) raw.push_back({bits_of({a, b}), weight(rng)});
  }
  double total = 0;
  for (const auto& [c, w] : raw) total += w;
  d.codes.push_back(bits_of({zone.front()}));
  d.weights.push_back(quiet);
  for (const auto& [c, w] : raw) {
    if (c == d.codes.front()) {
      d.weights.front() += (1 - quiet) * w / total;
      continue;
    }
    d.codes.push_back(c);
    d.weights.push_back((1 - quiet) * w / total);
  }
  return d;
}

// Chain with geometric dwell times: stay with 1 - 1/mean_ticks, otherwise move
// according to `successors`.
std::vector<double> dwell_chain(const std::vector<double>& mean_ticks, const std::vector<std::vector<double>>& successors) {
  const std::size_t n = mean_ticks.size();
  std::vector<double> a(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double leave = 1.0 / mean_ticks[i];
    double total = 0;
    for (double w : successors[i]) total += w;
    for (std::size_t j = 0; j < n; ++j) a[i * n + j] = leave * successors[i][j] / total;
    a[i * n + i] += 1.0 - leave;
  }
  return a;
}

}  // namespace

SynthConfig aruba_like_preset(std::size_t samples, std::uint64_t seed) {
  SynthConfig c;
  c.activities = {"Bed_To_Toilet", "Eating",  "Entering_Home", "Leaving_Home", "Meal_Preparation",
                  "Relax",         "Sleeping", "Wash_Dishes",   "Work"};
  enum : std::size_t { BedToilet, Eating, Entering, Leaving, Meal, Relax, Sleeping, Wash, Work, N };
  for (int i = 1; i <= 31; ++i) c.sensor_ids.push_back(fmt::format("M{:03d}", i));
  for (int i = 1; i <= 3; ++i) c.sensor_ids.push_back(fmt::format("D{:03d}", i));
  const std::size_t door_front = 31;

  // Mean dwell in 7 s ticks.
  const double minute = 60.0 / 7.0;
  const std::vector<double> dwell = {3 * minute,  15 * minute, 2 * minute,  90 * minute, 20 * minute,
                                     60 * minute, 300 * minute, 8 * minute, 45 * minute};
  std::vector<std::vector<double>> next(N, std::vector<double>(N, 0.0));
  next[BedToilet][Sleeping] = 0.85;
  next[BedToilet][Relax] = 0.15;
  next[Eating][Wash] = 0.4;
  next[Eating][Relax] = 0.4;
  next[Eating][Work] = 0.2;
  next[Entering][Relax] = 0.5;
  next[Entering][Meal] = 0.3;
  next[Entering][Work] = 0.2;
  next[Leaving][Entering] = 1.0;
  next[Meal][Eating] = 0.6;
  next[Meal][Wash] = 0.1;
  next[Meal][Relax] = 0.3;
  next[Relax][Sleeping] = 0.25;
  next[Relax][Meal] = 0.25;
  next[Relax][Work] = 0.2;
  next[Relax][Leaving] = 0.2;
  next[Relax][Eating] = 0.1;
  next[Sleeping][BedToilet] = 0.6;
  next[Sleeping][Meal] = 0.4;
  next[Wash][Relax] = 0.5;
  next[Wash][Work] = 0.2;
  next[Wash][Leaving] = 0.3;
  next[Work][Relax] = 0.4;
  next[Work][Meal] = 0.3;
  next[Work][Leaving] = 0.3;
  c.transition = dwell_chain(dwell, next);
  c.initial.assign(N, 0.0);
  c.initial[Sleeping] = 1.0;

  // Profiles are a fixed layout; only the weights vary with the seed.
  std::mt19937_64 rng(0x9e3779b97f4a7c15ULL ^ seed);
  c.emissions.resize(N);
  c.emissions[Sleeping] = zone_profile({0, 1, 2}, 0.6, rng);
  c.emissions[BedToilet] = zone_profile({2, 3, 4, 5}, 0.1, rng);
  // Kitchen tasks look identical, as do dining and lounging; only what came
  // before tells them apart.
  c.emissions[Meal] = zone_profile({14, 15, 16, 17, 18}, 0.15, rng);
  c.emissions[Wash] = c.emissions[Meal];
  c.emissions[Relax] = zone_profile({21, 22, 23, 24, 25, 26}, 0.3, rng);
  c.emissions[Eating] = c.emissions[Relax];
  c.emissions[Work] = zone_profile({8, 9, 10, 11}, 0.2, rng);
  c.emissions[Leaving] = {{ObservationCode{0}, bits_of({door_front}), bits_of({door_front, 27})}, {0.9, 0.05, 0.05}};
  c.emissions[Entering] = {{bits_of({door_front, 27}), bits_of({27, 24}), bits_of({door_front})}, {0.4, 0.3, 0.3}};

  // Each ordered pair leaves its own trace along the connecting hallway.
  const std::vector<std::size_t> hallway = {5, 6, 7, 12, 13, 29, 30, 32, 33};
  std::uniform_int_distribution<std::size_t> pick_hall(0, hallway.size() - 1);
  std::uniform_real_distribution<double> weight(0.5, 1.5);
  for (std::size_t a = 0; a < N; ++a) {
    for (std::size_t b = 0; b < N; ++b) {
      CodeDistribution d;
      if (a == Leaving && b == Entering) {
        d = {{ObservationCode{0}}, {1.0}};  // nobody home
      } else {
        for (int k = 0; k < 3; ++k) {
          const auto h1 = hallway[pick_hall(rng)];
          const auto h2 = hallway[pick_hall(rng)];
          d.codes.push_back(bits_of({h1, h2}));
          d.weights.push_back(weight(rng));
        }
      }
      c.signatures.emplace(std::pair{a, b}, std::move(d));
    }
  }
  c.pair_signatures = true;
  c.code_hold = 0.5;
  c.gap_fraction = 0.3;
  c.tail_gap_fraction["Leaving_Home"] = 0.85;
  c.samples = samples;
  c.seed = seed;
  return c;
}

SynthConfig random_synth_config(std::size_t activities, std::size_t sensors, std::uint64_t seed) {
  if (activities == 0 || sensors == 0 || sensors > kMaxSensors) invalid("bad activity or sensor count");
  std::mt19937_64 rng(0xd1b54a32d192ed03ULL ^ seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  SynthConfig c;
  for (std::size_t i = 0; i < activities; ++i) c.activities.push_back(fmt::format("Activity_{}", i));
  for (std::size_t s = 0; s < sensors; ++s) c.sensor_ids.push_back(fmt::format("M{:03d}", s + 1));

  std::vector<double> dwell(activities);
  std::vector<std::vector<double>> next(activities, std::vector<double>(activities, 0.0));
  for (std::size_t i = 0; i < activities; ++i) {
    dwell[i] = 20 + 60 * unit(rng);
    for (std::size_t j = 0; j < activities; ++j)
      if (j != i || activities == 1) next[i][j] = 0.2 + unit(rng);
  }
  c.transition = dwell_chain(dwell, next);
  c.initial.assign(activities, 1.0 / static_cast<double>(activities));

  std::uniform_int_distribution<std::size_t> sensor(0, sensors - 1);
  for (std::size_t i = 0; i < activities; ++i) {
    std::vector<std::size_t> zone;
    for (std::size_t k = 0; k < 3; ++k) zone.push_back(sensor(rng));
    std::sort(zone.begin(), zone.end());
    zone.erase(std::unique(zone.begin(), zone.end()), zone.end());
    c.emissions.push_back(zone_profile(zone, 0.2, rng));
  }
  for (std::size_t a = 0; a < activities; ++a) {
    for (std::size_t b = 0; b < activities; ++b) {
      CodeDistribution d;
      for (int k = 0; k < 2; ++k) {
        d.codes.push_back(bits_of({sensor(rng), sensor(rng)}));
        d.weights.push_back(0.5 + unit(rng));
      }
      c.signatures.emplace(std::pair{a, b}, std::move(d));
    }
  }
  c.seed = seed;
  return c;
}

SynthConfig synth_preset(std::string_view name, std::uint64_t seed) {
  if (name == "aruba-like") return aruba_like_preset(100'000, seed);
  if (name == "small") {
    auto c = random_synth_config(3, 8, seed);
    // Activities look alike; only the gap traces reveal who follows whom.
    for (auto& e : c.emissions) e = c.emissions.front();
    c.pair_signatures = true;
    c.samples = 10'000;
    return c;
  }
  invalid(fmt::format("unknown synth preset '{}' (expected aruba-like or small)", name));
}

SynthConfig synth_config_from_text(std::string_view text) {
  std::map<std::string, std::string> kv;
  std::size_t pos = 0;
  std::size_t line_number = 0;
  while (pos < text.size()) {
    auto eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string line(text.substr(pos, eol - pos));
    pos = eol + 1;
    ++line_number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    const auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) invalid(fmt::format("line {}: expected key=value", line_number));
    auto strip = [](std::string s) {
      const auto first = s.find_first_not_of(" \t\r");
      if (first == std::string::npos) return std::string();
      return s.substr(first, s.find_last_not_of(" \t\r") - first + 1);
    };
    kv[strip(line.substr(0, eq))] = strip(line.substr(eq + 1));
  }

  auto number = [&](const std::string& key) {
    const auto& v = kv.at(key);
    char* end = nullptr;
    const double d = std::strtod(v.c_str(), &end);
    if (end == v.c_str() || *end != '\0' || !std::isfinite(d)) invalid(fmt::format("'{}' is not a number: '{}'", key, v));
    return d;
  };
  auto count = [&](const std::string& key) {
    const double d = number(key);
    if (d < 0 || d != std::floor(d)) invalid(fmt::format("'{}' must be a nonnegative integer", key));
    return static_cast<std::size_t>(d);
  };

  const std::uint64_t seed = kv.contains("seed") ? count("seed") : 1;
  const std::string preset = kv.contains("preset") ? kv["preset"] : "small";
  SynthConfig c;
  if (preset == "random") {
    c = random_synth_config(kv.contains("activities") ? count("activities") : 3,
                            kv.contains("sensors") ? count("sensors") : 8, seed);
    c.pair_signatures = true;
  } else {
    c = synth_preset(preset, seed);
  }
  static const std::set<std::string> known = {"preset", "seed", "activities", "sensors", "samples", "duration",
                                              "delta_t", "gap_fraction", "gap_mode", "signatures", "hold", "start"};
  for (const auto& [k, v] : kv)
    if (!known.contains(k)) invalid(fmt::format("unknown synth key '{}'", k));

  if (kv.contains("delta_t")) c.delta_t = Duration::from_seconds(number("delta_t"));
  if (kv.contains("samples")) c.samples = count("samples");
  if (kv.contains("duration")) {
    const auto duration = Duration::from_seconds(number("duration"));
    if (c.delta_t.micros <= 0) invalid("delta_t must be positive");
    c.samples = static_cast<std::size_t>(duration.micros / c.delta_t.micros) + 1;
  }
  if (kv.contains("gap_fraction")) c.gap_fraction = number("gap_fraction");
  if (kv.contains("gap_mode")) {
    if (kv["gap_mode"] == "boundary")
      c.placement = GapPlacement::Boundary;
    else if (kv["gap_mode"] == "uniform")
      c.placement = GapPlacement::Uniform;
    else
      invalid(fmt::format("gap_mode must be boundary or uniform, got '{}'", kv["gap_mode"]));
  }
  if (kv.contains("signatures")) {
    if (kv["signatures"] == "on")
      c.pair_signatures = true;
    else if (kv["signatures"] == "off")
      c.pair_signatures = false;
    else
      invalid("signatures must be on or off");
  }
  if (kv.contains("hold")) c.code_hold = number("hold");
  if (kv.contains("start")) {
    const auto& v = kv["start"];
    const auto space = v.find(' ');
    const auto t = space == std::string::npos ? parse_timestamp(v, "00:00:00")
                                              : parse_timestamp(std::string_view(v).substr(0, space),
                                                                std::string_view(v).substr(space + 1));
    if (!t) invalid(fmt::format("bad start time '{}'", v));
    c.start = *t;
  }
  c.validate();
  return c;
}

}  // namespace gapmark

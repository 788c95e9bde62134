#include "hmm_support.hpp"
#include "support.hpp"

#include <gapmark/paradigms.hpp>

#include <fmt/format.h>

#include <algorithm>
#include <numeric>
#include <sstream>

using namespace gapmark;
using test::make_series;

namespace {

LabelSpace plain_space(std::vector<std::string> names) { return {std::move(names), {}, Paradigm::GapRemoval}; }

void check_stochastic(const HmmModel& m) {
  const auto n = m.state_count();
  const auto k = m.symbol_count();
  CHECK(std::abs(std::accumulate(m.initial.begin(), m.initial.end(), 0.0) - 1) <= kStochasticTolerance);
  for (std::size_t i = 0; i < n; ++i) {
    double a = 0, b = 0;
    for (std::size_t j = 0; j < n; ++j) a += m.a(i, j);
    for (std::size_t j = 0; j < k; ++j) b += m.b(i, j);
    CHECK(std::abs(a - 1) <= kStochasticTolerance);
    CHECK(std::abs(b - 1) <= kStochasticTolerance);
  }
}

}  // namespace

TEST_CASE("counting without smoothing") {
  const auto m = estimate(make_series({"A", "A", "B"}, {1, 1, 2}), plain_space({"A", "B"}), 0.0);
  CHECK(m.a(0, 0) == 0.5);
  CHECK(m.a(0, 1) == 0.5);
  CHECK(m.initial == std::vector<double>{1.0, 0.0});
  CHECK(m.symbol_count() == 3);
  CHECK(m.b(0, m.symbol_of(ObservationCode{1})) == 1.0);
  CHECK(m.b(0, m.unseen_symbol()) == 0.0);
  // B never leaves, so its transition row falls back to uniform.
  CHECK(m.fallback_rows == std::vector<std::size_t>{1});
  CHECK(m.a(1, 0) == 0.5);

  const auto single = estimate(make_series({"A", "A", "A", "A"}, {1, 2, 2, 2}), plain_space({"A"}), 0.0);
  CHECK(single.transition == std::vector<double>{1.0});
  CHECK(single.b(0, single.symbol_of(ObservationCode{1})) == 0.25);
  CHECK(single.b(0, single.symbol_of(ObservationCode{2})) == 0.75);
  CHECK(single.fallback_rows.empty());
}

TEST_CASE("estimation errors") {
  CHECK_ERROR_CODE(estimate(make_series({"A", ""}), plain_space({"A"})), ErrorCode::NullLabelPresent);
  CHECK_ERROR_CODE(estimate(SampleSeries{}, plain_space({"A"})), ErrorCode::EmptySeries);
  CHECK_ERROR_CODE(estimate(make_series({"A"}), plain_space({"A"}), -1), ErrorCode::InvalidSmoothing);
  CHECK_ERROR_CODE(estimate(make_series({"C"}), plain_space({"A"})), ErrorCode::LabelNotInSpace);
}

TEST_CASE("initial distribution counts one start per calendar day") {
  auto s = make_series({"A", "A", "B", "B"});
  s.samples[2].time = test::kDay0 + Duration{kMicrosPerDay};
  s.samples[3].time = s.samples[2].time + Duration::from_seconds(7);
  const auto m = estimate(s, plain_space({"A", "B"}), 0.0);
  CHECK(m.initial == std::vector<double>{0.5, 0.5});
}

TEST_CASE("add-one smoothing matches a nested-loop counter") {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> state(0, 2);
  std::uniform_int_distribution<std::uint64_t> code(0, 4);
  for (int round = 0; round < 20; ++round) {
    std::vector<std::string> labels;
    std::vector<std::uint64_t> codes;
    for (int t = 0; t < 200; ++t) {
      labels.push_back("S" + std::to_string(state(rng)));
      codes.push_back(code(rng));
    }
    const auto s = make_series(labels, codes);
    const auto m = estimate(s, plain_space({"S0", "S1", "S2"}), 1.0);
    const std::size_t n = 3;
    const std::size_t msym = m.symbol_count();
    for (std::size_t i = 0; i < n; ++i) {
      const std::string si = "S" + std::to_string(i);
      double out_total = 0;
      for (std::size_t t = 0; t + 1 < labels.size(); ++t) out_total += labels[t] == si;
      for (std::size_t j = 0; j < n; ++j) {
        double c = 0;
        for (std::size_t t = 0; t + 1 < labels.size(); ++t)
          c += labels[t] == si && labels[t + 1] == "S" + std::to_string(j);
        CHECK(m.a(i, j) == doctest::Approx((c + 1) / (out_total + 3)).epsilon(1e-12));
      }
      double emit_total = 0;
      for (const auto& l : labels) emit_total += l == si;
      for (std::size_t k = 0; k < msym; ++k) {
        double c = 0;
        for (std::size_t t = 0; t < labels.size(); ++t)
          c += labels[t] == si && k < m.alphabet.size() && codes[t] == m.alphabet[k].bits;
        CHECK(m.b(i, k) == doctest::Approx((c + 1) / (emit_total + static_cast<double>(msym))).epsilon(1e-12));
      }
      const double pi = labels[0] == si ? 1.0 : 0.0;
      CHECK(m.initial[i] == doctest::Approx((pi + 1) / (1 + 3)).epsilon(1e-12));
    }
    check_stochastic(m);
  }
}

TEST_CASE("viterbi on hand-built models") {
  HmmModel m;
  m.states = {"X", "Y"};
  m.alphabet = {ObservationCode{0}};  // symbols 0 and the unseen slot 1
  m.initial = {0.5, 0.5};
  m.transition = {0.9, 0.1, 0.1, 0.9};
  m.emission = {1, 0, 0, 1};
  const std::vector<std::size_t> obs = {0, 0, 1};
  const auto path = viterbi_decode(m, obs);
  CHECK(path.states == std::vector<std::size_t>{0, 0, 1});
  CHECK(path.log_probability == doctest::Approx(std::log(0.5 * 0.9 * 0.1)).epsilon(1e-12));
  CHECK(brute_force_decode(m, obs).states == path.states);

  const std::vector<std::size_t> one = {1};
  CHECK(viterbi_decode(m, one).states == std::vector<std::size_t>{1});

  // Codes outside the alphabet decode as the unseen symbol.
  const std::vector<ObservationCode> codes = {ObservationCode{0}, ObservationCode{0}, ObservationCode{42}};
  CHECK(viterbi_decode(m, codes).states == path.states);

  CHECK_ERROR_CODE(viterbi_decode(m, std::span<const std::size_t>{}), ErrorCode::EmptyObservations);

  HmmModel impossible = m;
  impossible.transition = {1, 0, 0, 1};
  impossible.initial = {1, 0};
  CHECK_ERROR_CODE(viterbi_decode(impossible, obs), ErrorCode::ImpossibleSequence);
  CHECK(sequence_log_likelihood(impossible, obs) == -INFINITY);
}

TEST_CASE("ties resolve to the lowest index") {
  HmmModel m;
  m.states = {"X", "Y", "Z"};
  m.alphabet = {};
  m.initial = {1.0 / 3, 1.0 / 3, 1.0 / 3};
  m.transition.assign(9, 1.0 / 3);
  m.emission.assign(3, 1.0);
  const std::vector<std::size_t> obs(5, 0);
  CHECK(viterbi_decode(m, obs).states == std::vector<std::size_t>(5, 0));
  CHECK(brute_force_decode(m, obs).states == std::vector<std::size_t>(5, 0));
}

TEST_CASE("viterbi agrees with exhaustive search") {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<std::size_t> length(1, 6);
  for (int round = 0; round < 50; ++round) {
    const auto m = test::random_model(rng, 3, 4, round % 2 ? 0.3 : 0.0);
    std::uniform_int_distribution<std::size_t> sym(0, m.symbol_count() - 1);
    std::vector<std::size_t> obs(length(rng));
    for (auto& o : obs) o = sym(rng);
    const double total = test::brute_force_likelihood(m, obs);
    if (total == -INFINITY) {
      CHECK_ERROR_CODE(viterbi_decode(m, obs), ErrorCode::ImpossibleSequence);
      continue;
    }
    const auto v = viterbi_decode(m, obs);
    const auto b = brute_force_decode(m, obs);
    CHECK(v.states == b.states);
    CHECK(std::abs(v.log_probability - b.log_probability) <= 1e-9);
    CHECK(std::abs(v.log_probability - path_log_probability(m, v.states, obs)) <= 1e-9);
    const double forward = sequence_log_likelihood(m, obs);
    CHECK(std::abs(forward - total) <= 1e-9);
    CHECK(forward >= v.log_probability - 1e-12);
  }
}

TEST_CASE("brute force refuses huge instances") {
  std::mt19937_64 rng(1);
  const auto m = test::random_model(rng, 10, 3);
  const std::vector<std::size_t> obs(10, 0);
  CHECK_ERROR_CODE(brute_force_decode(m, obs), ErrorCode::InstanceTooLarge);
  const std::vector<std::size_t> one = {1};
  CHECK(brute_force_decode(m, one).states == viterbi_decode(m, one).states);
}

TEST_CASE("forward on a single consistent path equals that path") {
  HmmModel m;
  m.states = {"X", "Y"};
  m.alphabet = {ObservationCode{0}};
  m.initial = {0.3, 0.7};
  m.transition = {0.6, 0.4, 0.2, 0.8};
  m.emission = {1, 0, 0, 1};
  const std::vector<std::size_t> obs = {1, 0, 0, 1};
  const std::vector<std::size_t> path = {1, 0, 0, 1};
  CHECK(sequence_log_likelihood(m, obs) == doctest::Approx(path_log_probability(m, path, obs)).epsilon(1e-12));
  CHECK_ERROR_CODE(sequence_log_likelihood(m, std::span<const std::size_t>{}), ErrorCode::EmptyObservations);
}

TEST_CASE("decoding is equivariant under state permutation") {
  std::mt19937_64 rng(17);
  int identical = 0;
  for (int round = 0; round < 30; ++round) {
    const std::size_t n = 4;
    const auto m = test::random_model(rng, n, 5);
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    // State i of m becomes state perm[i] of p.
    HmmModel p = m;
    for (std::size_t i = 0; i < n; ++i) {
      p.states[perm[i]] = m.states[i];
      p.initial[perm[i]] = m.initial[i];
      for (std::size_t j = 0; j < n; ++j) p.transition[perm[i] * n + perm[j]] = m.a(i, j);
      for (std::size_t k = 0; k < m.symbol_count(); ++k) p.emission[perm[i] * m.symbol_count() + k] = m.b(i, k);
    }
    std::uniform_int_distribution<std::size_t> sym(0, 4);
    std::vector<std::size_t> obs(50);
    for (auto& o : obs) o = sym(rng);
    const auto a = viterbi_decode(m, obs);
    const auto b = viterbi_decode(p, obs);
    std::vector<std::size_t> mapped;
    for (auto q : a.states) mapped.push_back(perm[q]);
    CHECK(b.log_probability == doctest::Approx(a.log_probability).epsilon(1e-12));
    // Exactly tied paths (a cycle shifted inside a run of equal symbols) may
    // resolve differently once indices move; the mapped path must still be optimal.
    if (mapped == b.states)
      ++identical;
    else
      CHECK(std::abs(path_log_probability(p, mapped, obs) - b.log_probability) <= 1e-9);
  }
  CHECK(identical >= 25);
}

TEST_CASE("a million steps do not underflow") {
  HmmModel m;
  m.states = {"X", "Y"};
  m.alphabet = {ObservationCode{0}};
  m.initial = {0.5, 0.5};
  m.transition = {0.9, 0.1, 0.1, 0.9};
  m.emission = {0.1, 0.9, 0.9, 0.1};
  std::vector<std::size_t> obs(1'000'000);
  for (std::size_t t = 0; t < obs.size(); ++t) obs[t] = (t / 3) % 2;
  const auto path = viterbi_decode(m, obs);
  CHECK(path.states.size() == obs.size());
  CHECK(std::isfinite(path.log_probability));
  const double ll = sequence_log_likelihood(m, obs);
  CHECK(std::isfinite(ll));
  CHECK(ll >= path.log_probability);
}

TEST_CASE("estimates are deterministic and stochastic") {
  std::mt19937_64 rng(8);
  for (int round = 0; round < 30; ++round) {
    const auto s = test::random_gapped_series(rng, 300, 4, 0.3);
    for (auto p : {Paradigm::GapRemoval, Paradigm::Unknown, Paradigm::Interactivity, Paradigm::Hybrid}) {
      const auto t = apply_paradigm(p, s, default_rules());
      for (double alpha : {0.0, 0.01, 1.0}) {
        const auto m = estimate(t.series, t.space, alpha);
        check_stochastic(m);
        CHECK(estimate(t.series, t.space, alpha) == m);
      }
    }
  }
}

TEST_CASE("model files") {
  std::mt19937_64 rng(4);
  const auto s = test::random_gapped_series(rng, 400, 3, 0.3);
  const auto t = apply_interactivity_labels(s);
  auto m = estimate(t.series, t.space);
  m.training_digest = "abc123";

  std::stringstream buffer;
  save_model(m, buffer);
  const std::string text = buffer.str();
  std::istringstream in(text);
  CHECK(load_model(in) == m);

  SUBCASE("tampered row") {
    // Scale the first number of the first A row so the row sums to about 1.5.
    std::istringstream lines(text);
    std::ostringstream tampered;
    std::string line;
    bool done = false;
    while (std::getline(lines, line)) {
      if (!done && line.rfind("A ", 0) == 0) {
        std::istringstream fields(line.substr(2));
        std::vector<double> row;
        for (double x; fields >> x;) row.push_back(x);
        row[0] += 0.5;
        line = "A";
        for (double x : row) line += fmt::format(" {:.17g}", x);
        done = true;
      }
      tampered << line << '\n';
    }
    REQUIRE(done);
    std::istringstream bad(tampered.str());
    CHECK_ERROR_CODE(load_model(bad), ErrorCode::CorruptModel);
  }
  SUBCASE("future version") {
    std::string future = text;
    future.replace(future.find("format_version 1"), 16, "format_version 2");
    std::istringstream bad(future);
    CHECK_ERROR_CODE(load_model(bad), ErrorCode::VersionMismatch);
  }
  SUBCASE("truncated") {
    std::istringstream bad(text.substr(0, text.size() / 2));
    CHECK_ERROR_CODE(load_model(bad), ErrorCode::CorruptModel);
  }
}

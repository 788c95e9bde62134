#pragma once

#include <gapmark/error.hpp>
#include <gapmark/sampling.hpp>

#include <doctest.h>

#include <random>
#include <string>
#include <vector>

namespace gapmark::test {

inline const Timestamp kDay0{1'288'828'800'000'000};  // 2010-11-04 00:00:00

inline Timestamp at(double seconds) { return kDay0 + Duration::from_seconds(seconds); }

// Series of 7 s ticks. Empty label strings become gaps.
inline SampleSeries make_series(const std::vector<std::string>& labels, std::vector<std::uint64_t> codes = {}) {
  SampleSeries s;
  s.delta_t = Duration::from_seconds(7);
  s.sensor_count = 8;
  if (codes.empty()) codes.assign(labels.size(), 0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    Label l;
    if (!labels[i].empty()) l = labels[i];
    s.samples.push_back({at(7.0 * static_cast<double>(i)), ObservationCode{codes[i]}, l});
  }
  s.refresh_alphabet();
  return s;
}

inline std::vector<std::string> label_strings(const SampleSeries& s) {
  std::vector<std::string> out;
  for (const auto& x : s.samples) out.push_back(x.label.value_or(""));
  return out;
}

// Random partially labeled series over `activities` names A0.., gaps included.
inline SampleSeries random_gapped_series(std::mt19937_64& rng, std::size_t length, std::size_t activities,
                                         double gap_rate) {
  std::uniform_int_distribution<std::size_t> act(0, activities - 1);
  std::uniform_int_distribution<std::size_t> run(1, 6);
  std::uniform_int_distribution<std::uint64_t> code(0, 15);
  std::bernoulli_distribution gap(gap_rate);
  std::vector<std::string> labels;
  std::vector<std::uint64_t> codes;
  while (labels.size() < length) {
    const std::string name = gap(rng) ? "" : "A" + std::to_string(act(rng));
    for (std::size_t k = run(rng); k > 0 && labels.size() < length; --k) {
      labels.push_back(name);
      codes.push_back(code(rng));
    }
  }
  return make_series(labels, codes);
}

}  // namespace gapmark::test

#define CHECK_ERROR_CODE(expr, ec)                          \
  do {                                                      \
    bool caught_ = false;                                   \
    try {                                                   \
      (void)(expr);                                         \
    } catch (const ::gapmark::Error& e_) {                  \
      caught_ = true;                                       \
      CHECK_MESSAGE(e_.code() == (ec), e_.what());          \
    }                                                       \
    CHECK_MESSAGE(caught_, "expected gapmark::Error");      \
  } while (false)

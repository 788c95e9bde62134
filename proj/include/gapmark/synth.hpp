#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "gapmark/events.hpp"
#include "gapmark/sampling.hpp"

namespace gapmark {

struct CodeDistribution {
  std::vector<ObservationCode> codes;
  std::vector<double> weights;  // unnormalized, positive
};

enum class GapPlacement {
  Boundary,  // erode the edges of every activity run
  Uniform,   // erase one contiguous block at a random position inside each run
};

/// Generator for a synthetic single-resident home. The ground truth is a
/// per-tick Markov chain over activities; each tick's code is drawn from the
/// activity's profile (or a gap signature) and is held with probability
/// `code_hold` while the regime does not change.
struct SynthConfig {
  std::vector<std::string> activities;
  std::vector<std::string> sensor_ids;
  std::vector<double> initial;                // N
  std::vector<double> transition;             // N x N, per tick
  std::vector<CodeDistribution> emissions;    // one per activity
  double code_hold = 0.5;

  double gap_fraction = 0.3;                  // share of each run left unannotated
  GapPlacement placement = GapPlacement::Boundary;
  std::map<std::string, double> tail_gap_fraction;  // per-activity: erode only the tail, by this share

  bool pair_signatures = false;
  // Gap codes keyed by (preceding, following) activity index. Pairs without
  // an entry fall back to the preceding activity's profile.
  std::map<std::pair<std::size_t, std::size_t>, CodeDistribution> signatures;

  Duration delta_t{7'000'000};
  std::size_t samples = 10'000;
  Timestamp start{1'288'828'800'000'000};  // 2010-11-04 00:00:00
  std::uint64_t seed = 1;

  /// Throws Error(InvalidConfig).
  void validate() const;
};

struct SynthOutput {
  EventStream stream;  // annotated with the gapped labels
  SampleSeries gapped;
  SampleSeries truth;
};

SynthOutput generate(const SynthConfig& config);

/// 9 activities, 31 motion + 3 door sensors, gap signatures on, and a long
/// unannotated stretch between Leaving_Home and Entering_Home.
SynthConfig aruba_like_preset(std::size_t samples = 100'000, std::uint64_t seed = 1);

/// Random generator with `activities` states over `sensors` sensors.
SynthConfig random_synth_config(std::size_t activities, std::size_t sensors, std::uint64_t seed);

/// "aruba-like" or "small" (3 activities, 8 sensors).
SynthConfig synth_preset(std::string_view name, std::uint64_t seed);

/// Flat key=value overrides on top of a preset: preset, samples, duration,
/// delta_t, gap_fraction, gap_mode, signatures, hold, seed, activities,
/// sensors, start.
SynthConfig synth_config_from_text(std::string_view text);

}  // namespace gapmark

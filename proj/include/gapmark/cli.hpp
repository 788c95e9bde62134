#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "gapmark/paradigms.hpp"
#include "gapmark/sampling.hpp"

namespace gapmark {

/// Resolved experiment configuration. Keys mirror the long CLI flags.
struct RunConfig {
  std::optional<std::string> input;          // raw event log or ingested samples CSV
  std::optional<std::string> synth_preset;   // aruba-like | small
  std::optional<std::string> synth_config;   // key=value SynthConfig file
  std::optional<std::size_t> samples;        // synth length override
  std::optional<double> delta_t = 7.0;       // seconds; nullopt means "auto"
  double train_fraction = 0.6;
  std::vector<Paradigm> paradigms = {Paradigm::GapRemoval, Paradigm::Unknown, Paradigm::Interactivity,
                                     Paradigm::Hybrid};
  std::optional<std::string> rules;
  double alpha = 0.01;
  std::string out = ".";
  std::uint64_t seed = 1;
  std::optional<std::string> model;
  bool skip_malformed = false;
  LatchMode latch_mode = LatchMode::Latch;

  /// Applies one key=value setting; throws Error(Usage) on bad keys or values.
  void set(std::string_view key, std::string_view value);
  /// Exactly one input source, positive delta_t, fraction in (0, 1).
  void check() const;
  std::vector<std::pair<std::string, std::string>> echo() const;
};

/// Parses flat key=value text ('#' comments) into settings, in file order.
std::vector<std::pair<std::string, std::string>> parse_key_values(std::string_view text);

/// Full command-line entry point; returns the process exit code
/// (0 ok, 1 usage, 2 data error, 3 internal invariant failure).
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int exit_code_for(const std::exception& e);

}  // namespace gapmark

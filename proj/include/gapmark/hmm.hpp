#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "gapmark/paradigms.hpp"
#include "gapmark/sampling.hpp"

namespace gapmark {

inline constexpr double kDefaultSmoothing = 0.01;
inline constexpr double kStochasticTolerance = 1e-9;
inline constexpr int kModelFormatVersion = 1;

/// Discrete HMM over observation codes. The last symbol is reserved for
/// codes never seen in training.
struct HmmModel {
  std::vector<std::string> states;
  std::vector<ObservationCode> alphabet;  // sorted; excludes the unseen symbol
  std::vector<double> initial;            // N
  std::vector<double> transition;         // N x N, row-major
  std::vector<double> emission;           // N x M, row-major, M = alphabet.size() + 1

  double smoothing_alpha = kDefaultSmoothing;
  double delta_t_seconds = 0;
  std::size_t sensor_count = 0;
  std::string paradigm;
  std::string training_digest;
  // States whose transition or emission row had no counts and no smoothing,
  // and therefore received a uniform row.
  std::vector<std::size_t> fallback_rows;

  std::size_t state_count() const { return states.size(); }
  std::size_t symbol_count() const { return alphabet.size() + 1; }
  std::size_t unseen_symbol() const { return alphabet.size(); }

  double a(std::size_t from, std::size_t to) const { return transition[from * state_count() + to]; }
  double b(std::size_t state, std::size_t symbol) const { return emission[state * symbol_count() + symbol]; }

  /// Index of `code` in the alphabet, or unseen_symbol().
  std::size_t symbol_of(ObservationCode code) const;
  std::vector<std::size_t> symbols_of(std::span<const ObservationCode> codes) const;

  /// Throws Error(InvariantViolation) when a row is not stochastic, an entry
  /// lies outside [0, 1], or states/alphabet repeat.
  void validate() const;

  friend bool operator==(const HmmModel&, const HmmModel&) = default;
};

/// Supervised counting with additive smoothing. pi counts the first sample of
/// every calendar day present in the series.
HmmModel estimate(const SampleSeries& series, const LabelSpace& space, double alpha = kDefaultSmoothing);

struct DecodedPath {
  std::vector<std::size_t> states;
  double log_probability = 0;
};

/// Scores closer than this (relative) are ties for decoding purposes.
inline constexpr double kTieTolerance = 1e-12;

/// Log-space Viterbi. Ties resolve to the lowest state index, both for the
/// final state and at every backpointer.
DecodedPath viterbi_decode(const HmmModel& model, std::span<const std::size_t> symbols);
DecodedPath viterbi_decode(const HmmModel& model, std::span<const ObservationCode> codes);

inline constexpr double kBruteForceLimit = 1e7;

/// Exhaustive search over all N^T paths. Among equally probable paths it
/// returns the one Viterbi's tie rule produces: compare paths from the last
/// time step backwards and keep the smallest.
DecodedPath brute_force_decode(const HmmModel& model, std::span<const std::size_t> symbols);

/// Forward algorithm: log P(observations), -inf when impossible.
double sequence_log_likelihood(const HmmModel& model, std::span<const std::size_t> symbols);
double sequence_log_likelihood(const HmmModel& model, std::span<const ObservationCode> codes);

/// Log joint probability of one state path and the observations.
double path_log_probability(const HmmModel& model, std::span<const std::size_t> path,
                            std::span<const std::size_t> symbols);

void save_model(const HmmModel& model, std::ostream& out);
HmmModel load_model(std::istream& in);

}  // namespace gapmark

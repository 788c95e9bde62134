#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gapmark {

enum class ErrorCode {
  // events
  MalformedLine,
  UnmatchedBegin,
  UnmatchedEnd,
  OverlappingIntervals,
  // sampling
  EmptyStream,
  NonPositiveInterval,
  TooFewEvents,
  TooManySensors,
  EmptySeries,
  InvalidFraction,
  MalformedSeries,
  // paradigms
  AllSamplesNull,
  ReservedLabel,
  InvalidRule,
  UnknownLabelToken,
  // hmm
  NullLabelPresent,
  LabelNotInSpace,
  InvalidSmoothing,
  EmptyObservations,
  ImpossibleSequence,
  InstanceTooLarge,
  CorruptModel,
  VersionMismatch,
  // eval
  LengthMismatch,
  UnknownActivity,
  // synth / cli
  InvalidConfig,
  Io,
  Usage,
  // broken internal invariant (never a user error)
  InvariantViolation,
};

std::string_view error_code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace gapmark

#include "gapmark/error.hpp"

namespace gapmark {

std::string_view error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::MalformedLine: return "MalformedLine";
    case ErrorCode::UnmatchedBegin: return "UnmatchedBegin";
    case ErrorCode::UnmatchedEnd: return "UnmatchedEnd";
    case ErrorCode::OverlappingIntervals: return "OverlappingIntervals";
    case ErrorCode::EmptyStream: return "EmptyStream";
    case ErrorCode::NonPositiveInterval: return "NonPositiveInterval";
    case ErrorCode::TooFewEvents: return "TooFewEvents";
    case ErrorCode::TooManySensors: return "TooManySensors";
    case ErrorCode::EmptySeries: return "EmptySeries";
    case ErrorCode::InvalidFraction: return "InvalidFraction";
    case ErrorCode::MalformedSeries: return "MalformedSeries";
    case ErrorCode::AllSamplesNull: return "AllSamplesNull";
    case ErrorCode::ReservedLabel: return "ReservedLabel";
    case ErrorCode::InvalidRule: return "InvalidRule";
    case ErrorCode::UnknownLabelToken: return "UnknownLabelToken";
    case ErrorCode::NullLabelPresent: return "NullLabelPresent";
    case ErrorCode::LabelNotInSpace: return "LabelNotInSpace";
    case ErrorCode::InvalidSmoothing: return "InvalidSmoothing";
    case ErrorCode::EmptyObservations: return "EmptyObservations";
    case ErrorCode::ImpossibleSequence: return "ImpossibleSequence";
    case ErrorCode::InstanceTooLarge: return "InstanceTooLarge";
    case ErrorCode::CorruptModel: return "CorruptModel";
    case ErrorCode::VersionMismatch: return "VersionMismatch";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::UnknownActivity: return "UnknownActivity";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::Io: return "Io";
    case ErrorCode::Usage: return "Usage";
    case ErrorCode::InvariantViolation: return "InvariantViolation";
  }
  return "Error";
}

}  // namespace gapmark

#include "drn/error.hpp"

namespace drn {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NonPositiveTotal: return "NonPositiveTotal";
    case ErrorCode::DegenerateDensity: return "DegenerateDensity";
    case ErrorCode::SupportMismatch: return "SupportMismatch";
    case ErrorCode::SampleOutOfSupport: return "SampleOutOfSupport";
    case ErrorCode::ZeroDensityBin: return "ZeroDensityBin";
    case ErrorCode::EmptySamples: return "EmptySamples";
    case ErrorCode::ZeroVariance: return "ZeroVariance";
    case ErrorCode::FanInMismatch: return "FanInMismatch";
    case ErrorCode::InstanceTooLarge: return "InstanceTooLarge";
    case ErrorCode::NormalizationUnderflow: return "NormalizationUnderflow";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::NonFiniteGradient: return "NonFiniteGradient";
    case ErrorCode::VarianceUnderflow: return "VarianceUnderflow";
    case ErrorCode::MalformedCsv: return "MalformedCsv";
    case ErrorCode::EmptyGroup: return "EmptyGroup";
    case ErrorCode::ValueOutOfSupport: return "ValueOutOfSupport";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ArchitectureParseError: return "ArchitectureParseError";
    case ErrorCode::CheckpointParseError: return "CheckpointParseError";
    case ErrorCode::UnknownGenerator: return "UnknownGenerator";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace drn

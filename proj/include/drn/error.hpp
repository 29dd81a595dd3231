#ifndef DRN_ERROR_HPP
#define DRN_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace drn {

enum class ErrorCode {
  InvalidArgument,
  NonPositiveTotal,
  DegenerateDensity,
  SupportMismatch,
  SampleOutOfSupport,
  ZeroDensityBin,
  EmptySamples,
  ZeroVariance,
  FanInMismatch,
  InstanceTooLarge,
  NormalizationUnderflow,
  DimensionMismatch,
  ShapeMismatch,
  NonFiniteGradient,
  VarianceUnderflow,
  MalformedCsv,
  EmptyGroup,
  ValueOutOfSupport,
  ParseError,
  ArchitectureParseError,
  CheckpointParseError,
  UnknownGenerator,
  IoError,
};

std::string_view to_string(ErrorCode code) noexcept;

// All library failures are reported with this exception; code() identifies the
// failure class so callers can branch without parsing the message.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace drn

#endif  // DRN_ERROR_HPP

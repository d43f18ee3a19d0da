#pragma once

#include <stdexcept>
#include <string>

namespace klab {

enum class ErrorCode {
  DivisionByZeroFunction = 1,
  PoleEvaluation,
  ConstantPoleComposition,
  IndexOutOfRange,
  InvalidDimension,
  DegenerateParameters,
  ZeroC,
  ZeroSigma,
  SingularityEncountered,
  DomainViolation,
  IllConditionedMetric,
  ZeroGradient,
  ZeroPotential,
  NonpositiveKappa,
  NonpositiveQ,
  OutOfInterval,
  ParameterDomain,
  ConfigParse,
  IoFailure,
};

const char* error_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_name(code)) + ": " + what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace klab

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ihw {

enum class ErrorCode {
  InvalidArgument,
  ZeroVector,
  DimensionMismatch,
  EmptyPool,
  SoftMaxDenominatorZero,
  ZeroSignature,
  OutOfRange,
  WeightsNotNormalized,
  KernelAsymmetric,
  SingularDesign,
  SingularSystem,
  InvalidN,
  DivergenceDetected,
  DuplicateComposition,
  InvalidFamily,
  InvalidConfig,
  UnknownFlag,
  MalformedFile,
  OutputUnwritable,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every library failure is reported through this type; `code()` is the
/// stable discriminator, `what()` carries a human-readable detail.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ZeroVector: return "ZeroVector";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::EmptyPool: return "EmptyPool";
    case ErrorCode::SoftMaxDenominatorZero: return "SoftMaxDenominatorZero";
    case ErrorCode::ZeroSignature: return "ZeroSignature";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::WeightsNotNormalized: return "WeightsNotNormalized";
    case ErrorCode::KernelAsymmetric: return "KernelAsymmetric";
    case ErrorCode::SingularDesign: return "SingularDesign";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::InvalidN: return "InvalidN";
    case ErrorCode::DivergenceDetected: return "DivergenceDetected";
    case ErrorCode::DuplicateComposition: return "DuplicateComposition";
    case ErrorCode::InvalidFamily: return "InvalidFamily";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::UnknownFlag: return "UnknownFlag";
    case ErrorCode::MalformedFile: return "MalformedFile";
    case ErrorCode::OutputUnwritable: return "OutputUnwritable";
  }
  return "Unknown";
}

inline void require_dims(std::size_t expected, std::size_t actual, std::string_view what) {
  if (expected != actual) {
    throw Error(ErrorCode::DimensionMismatch,
                std::string(what) + ": expected " + std::to_string(expected) + ", got " +
                    std::to_string(actual));
  }
}

}  // namespace ihw

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace semshift {

enum class ErrorCode {
  kInvalidArgument,
  kMissingFile,
  kMalformedLine,
  kEmptyCorpus,
  kUnknownLabel,
  kNoCandidates,
  kWordAbsent,
  kDimMismatch,
  kMalformedRecord,
  kZeroVector,
  kTooFewRows,
  kSingleCluster,
  kNotADistribution,
  kLengthMismatch,
  kEmptyMatrix,
  kEmptyDocument,
  kUnknownDocId,
  kMissingLogProb,
  kEmptyReplacementVocab,
  kIoError,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kMissingFile: return "MissingFile";
    case ErrorCode::kMalformedLine: return "MalformedLine";
    case ErrorCode::kEmptyCorpus: return "EmptyCorpus";
    case ErrorCode::kUnknownLabel: return "UnknownLabel";
    case ErrorCode::kNoCandidates: return "NoCandidates";
    case ErrorCode::kWordAbsent: return "WordAbsent";
    case ErrorCode::kDimMismatch: return "DimMismatch";
    case ErrorCode::kMalformedRecord: return "MalformedRecord";
    case ErrorCode::kZeroVector: return "ZeroVector";
    case ErrorCode::kTooFewRows: return "TooFewRows";
    case ErrorCode::kSingleCluster: return "SingleCluster";
    case ErrorCode::kNotADistribution: return "NotADistribution";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kEmptyMatrix: return "EmptyMatrix";
    case ErrorCode::kEmptyDocument: return "EmptyDocument";
    case ErrorCode::kUnknownDocId: return "UnknownDocId";
    case ErrorCode::kMissingLogProb: return "MissingLogProb";
    case ErrorCode::kEmptyReplacementVocab: return "EmptyReplacementVocab";
    case ErrorCode::kIoError: return "IoError";
  }
  return "Unknown";
}

// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace semshift

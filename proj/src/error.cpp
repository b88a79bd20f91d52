#include "relpred/error.hpp"

namespace relpred {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kFormatError: return "FormatError";
    case ErrorKind::kUnknownNode: return "UnknownNode";
    case ErrorKind::kNoNeighbors: return "NoNeighbors";
    case ErrorKind::kAllZeroWeights: return "AllZeroWeights";
    case ErrorKind::kEmptyGraph: return "EmptyGraph";
    case ErrorKind::kEmptyCorpus: return "EmptyCorpus";
    case ErrorKind::kUnknownName: return "UnknownName";
    case ErrorKind::kZeroVector: return "ZeroVector";
    case ErrorKind::kEmptyQuery: return "EmptyQuery";
    case ErrorKind::kMissingEmbedding: return "MissingEmbedding";
    case ErrorKind::kTooFewRows: return "TooFewRows";
    case ErrorKind::kEmptyCounts: return "EmptyCounts";
    case ErrorKind::kNoSamples: return "NoSamples";
    case ErrorKind::kDimensionMismatch: return "DimensionMismatch";
    case ErrorKind::kLengthMismatch: return "LengthMismatch";
    case ErrorKind::kEmptyInput: return "Empty";
    case ErrorKind::kAllUndefined: return "AllUndefined";
    case ErrorKind::kSpecInvalid: return "SpecInvalid";
    case ErrorKind::kInvalidArgument: return "InvalidArgument";
    case ErrorKind::kConfigError: return "ConfigError";
    case ErrorKind::kMissingArtifact: return "MissingArtifact";
    case ErrorKind::kIoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& what)
    : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace relpred

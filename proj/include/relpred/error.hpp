#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace relpred {

enum class ErrorKind {
  kFormatError,
  kUnknownNode,
  kNoNeighbors,
  kAllZeroWeights,
  kEmptyGraph,
  kEmptyCorpus,
  kUnknownName,
  kZeroVector,
  kEmptyQuery,
  kMissingEmbedding,
  kTooFewRows,
  kEmptyCounts,
  kNoSamples,
  kDimensionMismatch,
  kLengthMismatch,
  kEmptyInput,
  kAllUndefined,
  kSpecInvalid,
  kInvalidArgument,
  kConfigError,
  kMissingArtifact,
  kIoError,
};

std::string_view to_string(ErrorKind kind);

// Single exception type for the library; callers branch on kind().
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& what);

}  // namespace relpred

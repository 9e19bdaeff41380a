#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace veritas {

enum class ErrorCode {
  ZeroDimension,
  PatchOutOfBounds,
  NoRelevantPatches,
  InvalidArgument,
  DimMismatch,
  ShapeMismatch,
  BackendUnavailable,
  GradientsUnsupported,
  UnsupportedFactor,
  GenerationTimeout,
  AllZeroWeights,
  EmptyValidationSet,
  EmptyPairList,
  EmptyTripletList,
  NoPositivePairs,
  ParseError,
  DuplicateArtifactName,
  MissingTupleField,
  MalformedResponse,
  ArtifactMismatch,
  NonDyadicDims,
  EmptyDataset,
  NoSuchDirectory,
  IoError,
  ConfigError,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries one of the codes above so
/// callers (tests, the CLI) can branch on the kind rather than the text.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace veritas

#include "veritas/error.hpp"

namespace veritas {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::ZeroDimension: return "ZeroDimension";
    case ErrorCode::PatchOutOfBounds: return "PatchOutOfBounds";
    case ErrorCode::NoRelevantPatches: return "NoRelevantPatches";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::DimMismatch: return "DimMismatch";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::BackendUnavailable: return "BackendUnavailable";
    case ErrorCode::GradientsUnsupported: return "GradientsUnsupported";
    case ErrorCode::UnsupportedFactor: return "UnsupportedFactor";
    case ErrorCode::GenerationTimeout: return "GenerationTimeout";
    case ErrorCode::AllZeroWeights: return "AllZeroWeights";
    case ErrorCode::EmptyValidationSet: return "EmptyValidationSet";
    case ErrorCode::EmptyPairList: return "EmptyPairList";
    case ErrorCode::EmptyTripletList: return "EmptyTripletList";
    case ErrorCode::NoPositivePairs: return "NoPositivePairs";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::DuplicateArtifactName: return "DuplicateArtifactName";
    case ErrorCode::MissingTupleField: return "MissingTupleField";
    case ErrorCode::MalformedResponse: return "MalformedResponse";
    case ErrorCode::ArtifactMismatch: return "ArtifactMismatch";
    case ErrorCode::NonDyadicDims: return "NonDyadicDims";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::NoSuchDirectory: return "NoSuchDirectory";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

}  // namespace veritas

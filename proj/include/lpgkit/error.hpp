#pragma once

#include <stdexcept>
#include <string>

namespace lpgkit {

enum class ErrorCode {
  DuplicateId,
  InvalidProperty,
  DanglingEndpoint,
  UnknownVertex,
  NotFrozen,
  ParseError,
  ManifestMismatch,
  InvalidRatios,
  EmptyClass,
  MixedKinds,
  RaggedVector,
  EmptyGraph,
  UnknownName,
  SchemaMismatch,
  RowMismatch,
  DimMismatch,
  NoForwardCache,
  ShapeMismatch,
  EmptyMask,
  UnknownTarget,
  DegenerateTarget,
  InvalidSpec,
  InvalidConfig,
  IoError,
};

inline const char* error_code_name(ErrorCode c) {
  switch (c) {
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::InvalidProperty: return "InvalidProperty";
    case ErrorCode::DanglingEndpoint: return "DanglingEndpoint";
    case ErrorCode::UnknownVertex: return "UnknownVertex";
    case ErrorCode::NotFrozen: return "NotFrozen";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ManifestMismatch: return "ManifestMismatch";
    case ErrorCode::InvalidRatios: return "InvalidRatios";
    case ErrorCode::EmptyClass: return "EmptyClass";
    case ErrorCode::MixedKinds: return "MixedKinds";
    case ErrorCode::RaggedVector: return "RaggedVector";
    case ErrorCode::EmptyGraph: return "EmptyGraph";
    case ErrorCode::UnknownName: return "UnknownName";
    case ErrorCode::SchemaMismatch: return "SchemaMismatch";
    case ErrorCode::RowMismatch: return "RowMismatch";
    case ErrorCode::DimMismatch: return "DimMismatch";
    case ErrorCode::NoForwardCache: return "NoForwardCache";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::EmptyMask: return "EmptyMask";
    case ErrorCode::UnknownTarget: return "UnknownTarget";
    case ErrorCode::DegenerateTarget: return "DegenerateTarget";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

/// Exception carrying a machine-checkable error code plus a human message.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace lpgkit

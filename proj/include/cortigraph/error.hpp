#pragma once

#include <stdexcept>
#include <string>

namespace cortigraph {

// Every failure the library can raise. The string form (to_string) is what
// the CLI prints in its error JSON, so names are part of the interface.
enum class Errc {
  // dataio
  MissingManifest,
  ShapeMismatch,
  NonFiniteValue,
  BadMagic,
  RaggedCsv,
  IndexOutOfRange,
  DuplicateSourceAssignment,
  InvalidRange,
  InvalidConfig,
  Io,
  // preproc
  BandOutOfRange,
  TooShortSignal,
  WindowOutsideEpoch,
  // inverse
  TooFewSamples,
  SingularSystem,
  NonPositiveStandardizer,
  ChannelCountMismatch,
  UnknownScout,
  DuplicateName,
  // timefreq
  SeriesTooShort,
  EmptyBand,
  // connectivity
  LengthMismatch,
  InvalidThreshold,
  EmptyGroup,
  // graphfeat
  TooFewNodes,
  NoEdges,
  // learncluster
  TooFewExamples,
  KTooLarge,
  TooFewClasses,
  EmptyInput,
  KExceedsPoints,
  CurveTooShort,
  SizeMismatch,
  // report
  DegenerateVariance,
  MissingInput,
};

const char* to_string(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what);

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] void fail(Errc code, const std::string& what);

}  // namespace cortigraph

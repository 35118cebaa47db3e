#include "cortigraph/error.hpp"

namespace cortigraph {

const char* to_string(Errc code) noexcept {
  switch (code) {
    case Errc::MissingManifest: return "MissingManifest";
    case Errc::ShapeMismatch: return "ShapeMismatch";
    case Errc::NonFiniteValue: return "NonFiniteValue";
    case Errc::BadMagic: return "BadMagic";
    case Errc::RaggedCsv: return "RaggedCsv";
    case Errc::IndexOutOfRange: return "IndexOutOfRange";
    case Errc::DuplicateSourceAssignment: return "DuplicateSourceAssignment";
    case Errc::InvalidRange: return "InvalidRange";
    case Errc::InvalidConfig: return "InvalidConfig";
    case Errc::Io: return "Io";
    case Errc::BandOutOfRange: return "BandOutOfRange";
    case Errc::TooShortSignal: return "TooShortSignal";
    case Errc::WindowOutsideEpoch: return "WindowOutsideEpoch";
    case Errc::TooFewSamples: return "TooFewSamples";
    case Errc::SingularSystem: return "SingularSystem";
    case Errc::NonPositiveStandardizer: return "NonPositiveStandardizer";
    case Errc::ChannelCountMismatch: return "ChannelCountMismatch";
    case Errc::UnknownScout: return "UnknownScout";
    case Errc::DuplicateName: return "DuplicateName";
    case Errc::SeriesTooShort: return "SeriesTooShort";
    case Errc::EmptyBand: return "EmptyBand";
    case Errc::LengthMismatch: return "LengthMismatch";
    case Errc::InvalidThreshold: return "InvalidThreshold";
    case Errc::EmptyGroup: return "EmptyGroup";
    case Errc::TooFewNodes: return "TooFewNodes";
    case Errc::NoEdges: return "NoEdges";
    case Errc::TooFewExamples: return "TooFewExamples";
    case Errc::KTooLarge: return "KTooLarge";
    case Errc::TooFewClasses: return "TooFewClasses";
    case Errc::EmptyInput: return "EmptyInput";
    case Errc::KExceedsPoints: return "KExceedsPoints";
    case Errc::CurveTooShort: return "CurveTooShort";
    case Errc::SizeMismatch: return "SizeMismatch";
    case Errc::DegenerateVariance: return "DegenerateVariance";
    case Errc::MissingInput: return "MissingInput";
  }
  return "Unknown";
}

Error::Error(Errc code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

void fail(Errc code, const std::string& what) { throw Error(code, what); }

}  // namespace cortigraph

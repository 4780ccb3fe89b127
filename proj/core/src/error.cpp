#include "pragex/error.hpp"

namespace pragex {

std::string_view errc_name(Errc code) {
  switch (code) {
    case Errc::LineCountMismatch: return "LineCountMismatch";
    case Errc::EmptyFile: return "EmptyFile";
    case Errc::FileNotFound: return "FileNotFound";
    case Errc::MalformedLink: return "MalformedLink";
    case Errc::IndexOutOfBounds: return "IndexOutOfBounds";
    case Errc::PairMismatch: return "PairMismatch";
    case Errc::SchemaViolation: return "SchemaViolation";
    case Errc::TaggerFailure: return "TaggerFailure";
    case Errc::MissingAlignment: return "MissingAlignment";
    case Errc::OverlappingSpans: return "OverlappingSpans";
    case Errc::UnbalancedBrackets: return "UnbalancedBrackets";
    case Errc::NestedBrackets: return "NestedBrackets";
    case Errc::SeparatorCollision: return "SeparatorCollision";
    case Errc::DegenerateLabels: return "DegenerateLabels";
    case Errc::AdapterTimeout: return "AdapterTimeout";
    case Errc::MalformedScores: return "MalformedScores";
    case Errc::AdapterFailure: return "AdapterFailure";
    case Errc::NoPositives: return "NoPositives";
    case Errc::EmptyPool: return "EmptyPool";
    case Errc::InsufficientPositives: return "InsufficientPositives";
    case Errc::LabelSinkTimeout: return "LabelSinkTimeout";
    case Errc::ValidationFailure: return "ValidationFailure";
    case Errc::EmptyTestSet: return "EmptyTestSet";
    case Errc::InvalidConfig: return "InvalidConfig";
    case Errc::InvalidState: return "InvalidState";
    case Errc::EmptyText: return "EmptyText";
  }
  return "Unknown";
}

}  // namespace pragex

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace pragex {

enum class Errc {
  LineCountMismatch,
  EmptyFile,
  FileNotFound,
  MalformedLink,
  IndexOutOfBounds,
  PairMismatch,
  SchemaViolation,
  TaggerFailure,
  MissingAlignment,
  OverlappingSpans,
  UnbalancedBrackets,
  NestedBrackets,
  SeparatorCollision,
  DegenerateLabels,
  AdapterTimeout,
  MalformedScores,
  AdapterFailure,
  NoPositives,
  EmptyPool,
  InsufficientPositives,
  LabelSinkTimeout,
  ValidationFailure,
  EmptyTestSet,
  InvalidConfig,
  InvalidState,
  EmptyText,
};

std::string_view errc_name(Errc code);

// Every failure the library reports carries one of the codes above; callers
// that care about the category switch on code(), the message is for humans.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace pragex

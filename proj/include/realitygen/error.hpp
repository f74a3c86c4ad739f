#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace realitygen {

enum class ErrorKind {
  TruncatedFile,
  NonFiniteValue,
  ZeroRange,
  InvalidRing,
  EmptySweep,
  IoFailure,
  LabelMismatch,
  MissingSequence,
  EmptyDataset,
  IndexMismatch,
  NonPositiveRange,
  NonPositiveRate,
  MissingChannels,
  ShapeMismatch,
  MaskMismatch,
  EmptyMask,
  InvalidArgument,
  InvalidConfig,
};

std::string_view to_string(ErrorKind kind);

/// Every failure raised by the library carries one of the kinds above so
/// callers (the CLI, the pipeline's per-frame error records) can branch on it.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace realitygen

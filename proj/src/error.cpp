#include "realitygen/error.hpp"

namespace realitygen {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::TruncatedFile: return "TruncatedFile";
    case ErrorKind::NonFiniteValue: return "NonFiniteValue";
    case ErrorKind::ZeroRange: return "ZeroRange";
    case ErrorKind::InvalidRing: return "InvalidRing";
    case ErrorKind::EmptySweep: return "EmptySweep";
    case ErrorKind::IoFailure: return "IoFailure";
    case ErrorKind::LabelMismatch: return "LabelMismatch";
    case ErrorKind::MissingSequence: return "MissingSequence";
    case ErrorKind::EmptyDataset: return "EmptyDataset";
    case ErrorKind::IndexMismatch: return "IndexMismatch";
    case ErrorKind::NonPositiveRange: return "NonPositiveRange";
    case ErrorKind::NonPositiveRate: return "NonPositiveRate";
    case ErrorKind::MissingChannels: return "MissingChannels";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::MaskMismatch: return "MaskMismatch";
    case ErrorKind::EmptyMask: return "EmptyMask";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::InvalidConfig: return "InvalidConfig";
  }
  return "Unknown";
}

}  // namespace realitygen

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fbgsp {

enum class Errc {
  InvalidArgument,
  IndexOutOfRange,
  SelfLoopInInput,
  IsolatedNode,
  DimensionMismatch,
  ShapeMismatch,
  MatrixTooLarge,
  NotSymmetric,
  NoConvergence,
  NotALaplacian,
  ZeroSignal,
  LabelOutOfRange,
  AllNodesIsolated,
  EmptyGraph,
  NonFiniteValue,
  EmptyMask,
  LossNotScalar,
  EmptyClass,
  ParseError,
  InconsistentNodeCount,
  IoError,
};

constexpr std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::IndexOutOfRange: return "IndexOutOfRange";
    case Errc::SelfLoopInInput: return "SelfLoopInInput";
    case Errc::IsolatedNode: return "IsolatedNodeWithUnnormalizableDegree";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::ShapeMismatch: return "ShapeMismatch";
    case Errc::MatrixTooLarge: return "MatrixTooLarge";
    case Errc::NotSymmetric: return "NotSymmetric";
    case Errc::NoConvergence: return "NoConvergence";
    case Errc::NotALaplacian: return "NotALaplacian";
    case Errc::ZeroSignal: return "ZeroSignal";
    case Errc::LabelOutOfRange: return "LabelOutOfRange";
    case Errc::AllNodesIsolated: return "AllNodesIsolated";
    case Errc::EmptyGraph: return "EmptyGraph";
    case Errc::NonFiniteValue: return "NonFiniteValue";
    case Errc::EmptyMask: return "EmptyMask";
    case Errc::LossNotScalar: return "LossNotScalar";
    case Errc::EmptyClass: return "EmptyClass";
    case Errc::ParseError: return "ParseError";
    case Errc::InconsistentNodeCount: return "InconsistentNodeCount";
    case Errc::IoError: return "IoError";
  }
  return "Unknown";
}

/// Every failure in the library is reported as an Error carrying a code.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

namespace detail {

inline void require(bool cond, Errc code, const std::string& what) {
  if (!cond) throw Error(code, what);
}

}  // namespace detail
}  // namespace fbgsp

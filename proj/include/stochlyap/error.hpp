#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace stochlyap {

enum class ErrorKind {
  NegativeEntry,
  RowSumViolation,
  DimensionMismatch,
  EmptySequence,
  InvalidDistribution,
  EnumerationTooLarge,
  Reducible,
  NoCertificate,
  NoScramblingWindow,
  AllBlocksDegenerate,
  InsufficientData,
  NonStationaryModel,
  EmptyActivation,
  NotReachable,
  MissingSelfArc,
  InconsistentBlock,
  InconsistentSystem,
  ConfigParse,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Every failure raised by the library. `index` and `value` carry the
/// offending row/vertex and quantity where the kind has one (otherwise -1 / 0).
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what, long index = -1, double value = 0.0)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what),
        kind_(kind),
        index_(index),
        value_(value) {}

  ErrorKind kind() const noexcept { return kind_; }
  long index() const noexcept { return index_; }
  double value() const noexcept { return value_; }

 private:
  ErrorKind kind_;
  long index_;
  double value_;
};

}  // namespace stochlyap

#pragma once

#include <stdexcept>
#include <string>

namespace onionlabel {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input file or entry outside the accepted alphabet.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Operand dimensions disagree with each other or with a declared shape.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// The target-vector annealing loop could not reach the requested region.
class AnnealError : public Error {
 public:
  enum class Kind {
    kNotSafeAtZero,       // epsilon reached 0 with b/n still inside Conv(H2)
    kOutsideHull,         // b/n left Conv(H1) before leaving Conv(H2)
    kStepBudget,          // max_anneal_steps exhausted
    kCannotEnterInterior  // ablation: Conv(H2) unreachable below the epsilon bound
  };

  AnnealError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}

  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

}  // namespace onionlabel

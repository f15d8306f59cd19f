#pragma once

#include <stdexcept>
#include <string>

namespace qclt {

enum class ErrorKind {
  InvalidArgument,
  ParseError,
  IoError,
  NonHermitian,
  NegativeEigenvalue,
  BadTrace,
  CutoffTooSmall,
  SupportViolation,
  NotCentered,
  UnsupportedCovariance,
  UnsupportedModes,
  UnphysicalCovariance,
  GridTooCoarse,
  QuadratureDivergence,
  RouteUnavailable,
  InsufficientOrder,
  DivergentMoment,
  NoValidDensity,
  DegenerateFit,
  FitIllConditioned,
  InfiniteBeta,
  EigenFailure,
  NotOddPolynomial,
  NumericalFailure,
};

const char* to_string(ErrorKind k);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

  // true for errors caused by bad user input rather than numerics
  bool is_input_error() const;

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace qclt

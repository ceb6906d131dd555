#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace liecurv {

// Base class for all library errors. CLI maps subclasses to exit codes:
// numerical failures -> 2, everything user-facing (bad input) -> 3.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Unsupported (family, l) combination or dimension cap exceeded.
class UnsupportedAlgebraError : public Error {
 public:
  using Error::Error;
};

// Malformed input: bad JSON document, inconsistent tensor sizes, bad flags.
class InputError : public Error {
 public:
  using Error::Error;
};

// Numerical failure: invariant violated beyond tolerance, solver breakdown,
// point outside the metric domain.
class NumericalError : public Error {
 public:
  using Error::Error;
};

// Rank decision failed: the singular-value gap at the cut is below the
// policy's min_gap_ratio. Carries both candidate ranks; never resolved
// silently.
class AmbiguousRankError : public NumericalError {
 public:
  AmbiguousRankError(std::size_t rank_lo, std::size_t rank_hi, double gap)
      : NumericalError("ambiguous rank: candidates " + std::to_string(rank_lo) +
                       " and " + std::to_string(rank_hi) +
                       ", singular-value gap " + std::to_string(gap)),
        rank_lo_(rank_lo),
        rank_hi_(rank_hi),
        gap_(gap) {}

  std::size_t rank_lo() const { return rank_lo_; }
  std::size_t rank_hi() const { return rank_hi_; }
  double gap() const { return gap_; }

 private:
  std::size_t rank_lo_;
  std::size_t rank_hi_;
  double gap_;
};

}  // namespace liecurv

// Copyright 2026 The unravel Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace unravel {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input: out-of-range parameter, wrong kind of unravelling, etc.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A state left its invariant set (Hermitian, unit trace, PSD).
class InvariantError : public Error {
 public:
  using Error::Error;
};

/// Deterministic integration produced an invalid state; the step is too large.
class IntegrationError : public Error {
 public:
  using Error::Error;
};

/// A stochastic step violated its validity bound (rate * dt too large, or
/// the updated state failed the invariant checks).
class StepSizeError : public Error {
 public:
  using Error::Error;
};

/// The steady state is not unique.
class DegeneracyError : public Error {
 public:
  using Error::Error;
};

/// A drift matrix is not Hurwitz where a stationary solution was requested.
class StabilityError : public Error {
 public:
  using Error::Error;
};

/// An iterative or limiting procedure did not settle within its horizon.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// Fock truncation is too small for the state it has to represent.
class TruncationError : public Error {
 public:
  using Error::Error;
};

/// A covariance decomposition (excess noise, Gaussian means) is not PSD.
class DecompositionError : public Error {
 public:
  using Error::Error;
};

/// A threshold curve never crosses theta within the time horizon.
class HorizonError : public Error {
 public:
  HorizonError(const std::string& what, double first_value, double last_value)
      : Error(what), first_value_(first_value), last_value_(last_value) {}

  double first_value() const { return first_value_; }
  double last_value() const { return last_value_; }

 private:
  double first_value_;
  double last_value_;
};

/// Bisection had no sign change on its bracket.
class BracketError : public Error {
 public:
  using Error::Error;
};

/// A structural assumption of an algorithm (e.g. monotonicity) was violated.
class AssumptionError : public Error {
 public:
  using Error::Error;
};

/// The ensemble average that should define a quantity is degenerate
/// (e.g. theta equals the fully purified value, so no halfway point exists).
class DegenerateMeasureError : public Error {
 public:
  using Error::Error;
};

}  // namespace unravel

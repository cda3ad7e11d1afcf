// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gifilter {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A point left the region where its chart is valid.
class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what, long step = -1)
      : Error(step < 0 ? what : what + " (step " + std::to_string(step) + ")"), step_(step) {}
  long step() const noexcept { return step_; }

 private:
  long step_;
};

/// An iterative solve (numerical log, Newton) failed to converge.
class ConvergenceError : public Error {
 public:
  explicit ConvergenceError(const std::string& what, long index = -1)
      : Error(index < 0 ? what : what + " (sample " + std::to_string(index) + ")"), index_(index) {}
  long index() const noexcept { return index_; }

 private:
  long index_;
};

/// A matrix that must be SPD/invertible is singular or too ill-conditioned.
class SingularMatrixError : public Error {
 public:
  using Error::Error;
};

/// The request is mathematically valid but outside what the library supports
/// (e.g. a rank-deficient diffusion variance).
class UnsupportedError : public Error {
 public:
  using Error::Error;
};

/// Bad input data: dimension mismatch, negative counts, invalid configuration.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

}  // namespace gifilter

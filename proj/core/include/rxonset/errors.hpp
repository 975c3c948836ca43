// SPDX-FileCopyrightText: Copyright (c) 2026 The rxonset Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <limits>
#include <stdexcept>
#include <string>

namespace rxonset {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid arguments or configuration supplied by the caller.
class UsageError : public Error {
 public:
  using Error::Error;
};

/// Input data that cannot be used (malformed files, unknown schema versions).
class DataError : public Error {
 public:
  using Error::Error;
};

/// A required input produced by an earlier pipeline stage does not exist.
class DependencyError : public DataError {
 public:
  using DataError::DataError;
};

/// A patient appears on both sides of the train/test boundary.
class LeakageError : public DataError {
 public:
  using DataError::DataError;
};

/// A function was called with arguments violating its precondition.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// Weibull fitting failed; carries the shape iterate reached.
class FitError : public Error {
 public:
  FitError(const std::string& what, double last_shape)
      : Error(what), last_shape_(last_shape) {}

  double last_shape() const noexcept { return last_shape_; }

 private:
  double last_shape_;
};

/// Weibull fit on a sample with zero spread (shape diverges).
class DegenerateFitError : public FitError {
 public:
  explicit DegenerateFitError(const std::string& what)
      : FitError(what, std::numeric_limits<double>::infinity()) {}
};

/// No (drug, regime) entry in a parameter table.
class MissingParamsError : public Error {
 public:
  using Error::Error;
};

/// A summary statistic is undefined for the given data (too few points,
/// zero variance).
class UndefinedStatisticError : public Error {
 public:
  using Error::Error;
};

}  // namespace rxonset

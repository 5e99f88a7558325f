// Copyright 2026 The bispin Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace bispin {

/// Base class for all library errors. The category drives CLI exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Caller passed arguments outside an operation's preconditions.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Input data (config files, CSV) is malformed or inconsistent.
class DataError : public Error {
 public:
  using Error::Error;
};

/// A numerical procedure failed: no convergence, no root, label ambiguity.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace bispin

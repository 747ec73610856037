// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The ctqw Authors

#pragma once

#include <stdexcept>
#include <string>

namespace ctqw {

// Shape mismatches, broken preconditions, misuse of the tape.
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Argument outside the mathematical domain of an operation (log of x <= 0).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// NaN/Inf, non-convergence.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Missing or structurally broken dataset directory.
class DatasetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed content inside a dataset file; the message carries file:line.
class ParseError : public DatasetError {
 public:
  using DatasetError::DatasetError;
};

}  // namespace ctqw

// Copyright 2026 The ddfuse Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace ddfuse {

/// Operand shapes are incompatible with the requested operation.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A documented precondition was violated (divisibility, scalar loss, ...).
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// A file could not be parsed: bad magic, truncated data, unexpected layout.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A computed quantity became NaN or infinite.
class NumericError : public std::runtime_error {
 public:
  NumericError(std::string component, const std::string& what)
      : std::runtime_error(what), component_(std::move(component)) {}

  [[nodiscard]] const std::string& component() const noexcept { return component_; }

 private:
  std::string component_;
};

/// Invalid user configuration (unknown key, malformed value).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ddfuse

// Copyright (c) 2026 dbnet developers.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace dbnet {

/// Malformed input text or file content. CLI exit code 2.
class ParseError : public std::runtime_error {
  public:
    explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

/// Structurally valid input that violates a model invariant. CLI exit code 3.
class ValidationError : public std::runtime_error {
  public:
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

/// Numerical failure (singular solve, truncation overflow, ...). CLI exit code 4.
class NumericError : public std::runtime_error {
  public:
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace dbnet

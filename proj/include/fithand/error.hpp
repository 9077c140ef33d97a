/*
 * SPDX-FileCopyrightText: Copyright (c) 2026, The fithand authors.
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <stdexcept>
#include <string>

namespace fithand {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Tensor dimensions disagree with what an operation requires.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Invalid hyper-parameter or architecture configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Caller-supplied data is out of range (labels, subjects, ...).
class InputError : public Error {
 public:
  using Error::Error;
};

/// A computation produced or met a non-finite value.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// File system or decoding failure.
class IoError : public Error {
 public:
  using Error::Error;
};

class CheckpointError : public Error {
 public:
  enum class Kind { bad_magic, bad_version, bad_checksum, truncated, malformed };

  CheckpointError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}

  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

}  // namespace fithand

//
// paccmann-cpp: multi-modal anticancer drug sensitivity prediction.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <stdexcept>
#include <string>

namespace paccmann::common {

/// Base class for all library errors. Commands map subclasses onto exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed user input (files, ids, configuration). Exit code 2 in the CLI.
class InputError : public Error {
 public:
  using Error::Error;
};

/// A validation-protocol violation (e.g. train/val sharing ids). Exit code 3.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class InvalidConfig : public InputError {
 public:
  using InputError::InputError;
};

class IoError : public InputError {
 public:
  using InputError::InputError;
};

}  // namespace paccmann::common

// Copyright 2026 The QCPMD Authors
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
/**
 * @file errors.hpp
 * Exception types shared by all modules. The CLI maps them onto exit codes.
 */
#pragma once

#include <stdexcept>
#include <string>

namespace qcpmd {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Mismatched qubit counts, vector lengths, or size caps.
class DimensionError : public Error {
  public:
    using Error::Error;
};

/// Precondition on a numeric argument violated (e.g. unnormalized state).
class DomainError : public Error {
  public:
    using Error::Error;
};

/// Iterative procedure (SCF, optimizer) failed to converge.
class ConvergenceError : public Error {
  public:
    using Error::Error;
};

/// Non-finite state or violated integrator stability guard.
class NumericalAbort : public Error {
  public:
    using Error::Error;
};

/// Invalid user configuration or input file.
class ConfigError : public Error {
  public:
    using Error::Error;
};

} // namespace qcpmd

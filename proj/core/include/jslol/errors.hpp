// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the jslol Project.

#pragma once

#include <stdexcept>
#include <string>

namespace jslol {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad shapes, out-of-range parameters, malformed input files.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// File could not be opened, read or written.
class IoError : public Error {
public:
    using Error::Error;
};

/// Matrix is not symmetric positive definite.
class FactorizationError : public Error {
public:
    using Error::Error;
};

/// An iterative kernel (SVD, FCLSU) hit its iteration limit.
class ConvergenceError : public Error {
public:
    using Error::Error;
};

/// A solver iterate became non-finite.
class DivergenceError : public Error {
public:
    using Error::Error;
};

}  // namespace jslol

#pragma once

#include <stdexcept>
#include <string>

namespace risp {

// Base class for every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Shape or alignment mismatch (odd mosaic dims, patch misalignment, ...).
class DimensionError : public Error {
public:
    using Error::Error;
};

// Value outside the documented numeric domain (NaN, out of [0,1], ...).
class DomainError : public Error {
public:
    using Error::Error;
};

// Malformed on-disk content (bad magic, truncation, wrong arity, ...).
class ParseError : public Error {
public:
    using Error::Error;
};

// Filesystem failure (missing file, short write, ...).
class IoError : public Error {
public:
    using Error::Error;
};

// Color matrix is not invertible at the documented threshold.
class SingularMatrixError : public Error {
public:
    using Error::Error;
};

// Bad command line input; maps to the usage exit code in the CLI.
class UsageError : public Error {
public:
    using Error::Error;
};

// Base class for fitting failures; maps to the fit exit code in the CLI.
class FitError : public Error {
public:
    using Error::Error;
};

// Rank-deficient design matrix.  Remembers which candidate failed.
class IllConditionedFitError : public FitError {
public:
    IllConditionedFitError(const std::string& what, int candidate)
        : FitError(what), candidate_(candidate) {}

    int candidate() const noexcept { return candidate_; }

private:
    int candidate_;
};

}  // namespace risp

#pragma once

#include <stdexcept>
#include <string>

namespace deepiv {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Raised when a moment or system matrix is numerically rank deficient.
// In the estimation pipelines this usually signals weak or invalid
// instruments rather than a programming error.
struct SingularMatrix : Error {
    using Error::Error;
};

struct ShapeMismatch : Error {
    using Error::Error;
};

struct DomainError : Error {
    using Error::Error;
};

struct BasisTooLarge : Error {
    using Error::Error;
};

struct NonConvergence : Error {
    using Error::Error;
};

struct MissingExogenous : Error {
    using Error::Error;
};

// The Hausman test's inner difference matrix failed to be positive
// definite; the statistic is not computed in that case.
struct NonPositiveInner : Error {
    using Error::Error;
};

}  // namespace deepiv

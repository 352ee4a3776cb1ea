#pragma once

#include <stdexcept>
#include <string>

namespace depthq {

/// Base class for all errors raised by this library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Malformed or truncated input file (STL, PLY, PGM, JSON).
class FormatError : public Error {
public:
    using Error::Error;
};

/// A contract violation on in-memory data (bad index, degenerate face,
/// out-of-range parameter).
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Fixture pattern elements overlap or do not fit the backplate.
class LayoutError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

/// Marker correspondences are missing, invalid, or fit too poorly.
class RegistrationError : public Error {
public:
    using Error::Error;
};

/// A metric was requested on an empty point set. Deliberately distinct from
/// a zero result: no points is a capture failure, not a perfect score.
class NoDataError : public Error {
public:
    using Error::Error;
};

} // namespace depthq

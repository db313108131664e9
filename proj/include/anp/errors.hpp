#pragma once

#include <stdexcept>
#include <string>

namespace anp {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Vector/matrix dimension disagreements.
struct ShapeError : Error {
    using Error::Error;
};

// Invalid numeric content: labels out of range, probabilities out of bounds,
// non-finite values.
struct ValueError : Error {
    using Error::Error;
};

// Text-format problems; messages carry the offending line or row number.
struct ParseError : Error {
    using Error::Error;
};

// Filesystem-level failures.
struct IoError : Error {
    using Error::Error;
};

// Binary file problems, split by category so callers can tell them apart.
struct FormatError : IoError {
    using IoError::IoError;
};
struct BadMagicError : FormatError {
    using FormatError::FormatError;
};
struct BadVersionError : FormatError {
    using FormatError::FormatError;
};
struct TruncatedError : FormatError {
    using FormatError::FormatError;
};
struct DimMismatchError : FormatError {
    using FormatError::FormatError;
};

}  // namespace anp

#pragma once

#include <stdexcept>
#include <string>

namespace pedcross {

/// Base class for every error raised by the library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NonPositiveExtent : Error {
    using Error::Error;
};

struct SingularInnovation : Error {
    using Error::Error;
};

struct ZeroVector : Error {
    using Error::Error;
};

struct DimensionMismatch : Error {
    using Error::Error;
};

struct NonMonotonicFrameIndex : Error {
    using Error::Error;
};

struct DegenerateHeight : Error {
    using Error::Error;
};

struct InsufficientHistory : Error {
    using Error::Error;
};

struct SingleClassTraining : Error {
    using Error::Error;
};

struct EmptyData : Error {
    using Error::Error;
};

struct InsufficientData : Error {
    using Error::Error;
};

struct UnknownLabel : Error {
    using Error::Error;
};

struct SingleClassData : Error {
    using Error::Error;
};

struct ParseError : Error {
    ParseError(const std::string& msg, long line)
        : Error("line " + std::to_string(line) + ": " + msg), line(line) {}
    long line;
};

struct SchemaVersionMismatch : Error {
    using Error::Error;
};

struct MissingAnnotation : Error {
    using Error::Error;
};

struct IoError : Error {
    using Error::Error;
};

}  // namespace pedcross

#ifndef SPINLINK_ERRORS_HPP
#define SPINLINK_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace spinlink {

// Base class for everything this library throws on purpose.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A node/pulse parameter violates a physical invariant; the message names the field.
struct NonPhysicalParameter : Error {
    explicit NonPhysicalParameter(const std::string& field, const std::string& detail)
        : Error("non-physical parameter '" + field + "': " + detail), field(field) {}
    std::string field;
};

// An operation was called outside its documented domain.
struct PreconditionViolated : Error {
    using Error::Error;
};

struct StepTooSmall : Error {
    using Error::Error;
};

struct GridTooNarrow : Error {
    using Error::Error;
};

struct GridMismatch : Error {
    using Error::Error;
};

struct NotNormalized : Error {
    using Error::Error;
};

// The antisymmetric transfer function vanishes on the pulse support, so the
// heralding mode is undefined.
struct DegenerateAntisymmetric : Error {
    using Error::Error;
};

struct NoSignal : Error {
    using Error::Error;
};

struct NoRoots : Error {
    using Error::Error;
};

struct NotConverged : Error {
    using Error::Error;
};

struct StepSizeUnderflow : Error {
    using Error::Error;
};

struct NormViolation : Error {
    using Error::Error;
};

struct ConfigError : Error {
    using Error::Error;
};

}  // namespace spinlink

#endif

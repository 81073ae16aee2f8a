#pragma once

#include <stdexcept>
#include <string>

namespace ftmloc {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Solver geometry is rank-deficient (collinear anchors).
struct DegenerateGeometry : Error {
    using Error::Error;
};

// EKF range Jacobian undefined: predicted position sits on an AP.
struct SingularMeasurement : Error {
    using Error::Error;
};

// No step of a track ever produced a usable fix.
struct NoFixAvailable : Error {
    using Error::Error;
};

struct NonFiniteGradient : Error {
    using Error::Error;
};

struct TrackTooShort : Error {
    using Error::Error;
};

struct NoAnchors : Error {
    using Error::Error;
};

struct ParseError : Error {
    using Error::Error;
};

struct ValidationError : Error {
    using Error::Error;
};

struct NonMonotonicSteps : Error {
    using Error::Error;
};

struct DuplicateMeasurement : Error {
    using Error::Error;
};

struct KeyMismatch : Error {
    using Error::Error;
};

struct LengthMismatch : Error {
    using Error::Error;
};

struct EmptyInput : Error {
    using Error::Error;
};

}  // namespace ftmloc

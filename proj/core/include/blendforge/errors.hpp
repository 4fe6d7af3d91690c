#pragma once

#include <stdexcept>
#include <string>

namespace blendforge {

/// Base class for all toolkit errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Scene I/O.
struct ParseError : Error {
    using Error::Error;
};
struct ValidationError : Error {
    using Error::Error;
};

// Camera placement.
struct DegenerateObject : Error {
    using Error::Error;
};
struct DegeneratePose : Error {
    using Error::Error;
};
struct ObjectSkipped : Error {
    using Error::Error;
};
struct InvalidConfig : Error {
    using Error::Error;
};

// Image statistics.
struct EmptyImage : Error {
    using Error::Error;
};

// VLM gateway.
struct UnparseableVerdict : Error {
    using Error::Error;
};
struct UnparseableCaption : Error {
    using Error::Error;
};
struct GatewayError : Error {
    using Error::Error;
};

// Quality scoring.
struct DimensionMismatch : Error {
    using Error::Error;
};
struct ZeroVector : Error {
    using Error::Error;
};
struct MissingScore : Error {
    using Error::Error;
};

// Sampling.
struct ZeroVectorRow : Error {
    using Error::Error;
};
struct InvalidK : Error {
    using Error::Error;
};
struct InvalidPlan : Error {
    using Error::Error;
};

// Reporting.
struct MismatchedScenes : Error {
    using Error::Error;
};

// Filesystem / stage plumbing.
struct IoError : Error {
    using Error::Error;
};

}  // namespace blendforge

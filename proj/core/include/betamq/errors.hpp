#pragma once

#include <stdexcept>
#include <string>

namespace betamq {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Parameter and configuration errors.
struct ParameterOutOfRange : Error {
    using Error::Error;
};
struct NoAdmissibleAlpha : Error {
    using Error::Error;
};
struct BiasBoundViolated : Error {
    using Error::Error;
};
struct ConfigMismatch : Error {
    using Error::Error;
};

// Sequential / exponential process errors.
struct NonMonotoneLabel : Error {
    using Error::Error;
};
struct LabelAbsent : Error {
    using Error::Error;
};
struct EmptyQueueTouched : Error {
    using Error::Error;
};
struct EmptyBin : Error {
    using Error::Error;
};
struct DuplicateLabel : Error {
    using Error::Error;
};
struct CouplingBroken : Error {
    using Error::Error;
};

// Concurrent structure errors.
struct IncompleteLog : Error {
    using Error::Error;
};

// Graph / CLI errors.
struct ParseError : Error {
    using Error::Error;
};
struct CountMismatch : Error {
    using Error::Error;
};
struct NegativeWeight : Error {
    using Error::Error;
};

}  // namespace betamq

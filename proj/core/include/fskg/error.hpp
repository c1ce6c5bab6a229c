#pragma once

#include <stdexcept>
#include <string>

namespace fskg {

// Base for all library errors; subclasses map to CLI exit-status classes.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Tensor shape disagreement (names the operation and both shapes).
struct ShapeError : Error {
    using Error::Error;
};

// A violated API precondition (empty support set, non-scalar loss, ...).
struct ContractError : Error {
    using Error::Error;
};

// Malformed input file.
struct ParseError : Error {
    using Error::Error;
};

// Invalid or infeasible configuration; exits with status 2 at the CLI.
struct ConfigError : Error {
    using Error::Error;
};

// Episode / negative sampling cannot satisfy its preconditions.
struct SamplingError : Error {
    using Error::Error;
};

// Filesystem failure, with the offending path in the message.
struct IoError : Error {
    using Error::Error;
};

// Training diverged (NaN loss).
struct TrainingError : Error {
    using Error::Error;
};

} // namespace fskg

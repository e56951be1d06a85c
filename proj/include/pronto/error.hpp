#pragma once

#include <stdexcept>
#include <string>

namespace pronto {

// Error taxonomy shared by the library and the CLI exit-code mapping:
// config/shape problems -> 2, I/O and malformed files -> 3, numeric trouble -> 4.

struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Wrong tensor/model geometry (e.g. loading a checkpoint against a different spec).
struct ShapeError : ConfigError {
    using ConfigError::ConfigError;
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed serialized artifact (bad magic, truncated blob, unparsable header).
struct FormatError : IoError {
    using IoError::IoError;
};

struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Input that makes the requested operation meaningless (all-zero RMS, empty buffer).
struct DegenerateInput : NumericError {
    using NumericError::NumericError;
};

// A "cannot happen" situation (e.g. classical detection failing on a noiseless
// capture): indicates a bug in this library, not bad input.
struct InternalError : std::logic_error {
    using std::logic_error::logic_error;
};

// Training diverged; carries the epoch where the loss went non-finite.
struct TrainingError : NumericError {
    TrainingError(const std::string& what, int epoch)
        : NumericError(what + " (epoch " + std::to_string(epoch) + ")"), epoch(epoch) {}
    int epoch;
};

}  // namespace pronto

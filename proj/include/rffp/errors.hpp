#pragma once
// Error taxonomy shared by all modules. Every failure the CLI can surface
// maps onto one of these so exit paths stay machine-parseable.

#include <stdexcept>
#include <string>

namespace rffp {

// Invalid or inconsistent configuration (bad ranges, window overflow, ...).
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Operation preconditions violated by the data itself (negative time,
// non-binary symbol, window longer than segment, ...).
struct DomainError : std::runtime_error {
    explicit DomainError(const std::string& what) : std::runtime_error(what) {}
};

// Analysis cannot produce a defined answer from the given samples
// (e.g. no full envelope period within a frame).
struct InsufficientDataError : std::runtime_error {
    explicit InsufficientDataError(const std::string& what) : std::runtime_error(what) {}
};

// File and container problems.
struct IoError : std::runtime_error {
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

// Labels or records inconsistent with the dataset contract.
struct DataError : std::runtime_error {
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// Training diverged (NaN loss) or could not run.
struct TrainingError : std::runtime_error {
    explicit TrainingError(const std::string& what) : std::runtime_error(what) {}
};

}

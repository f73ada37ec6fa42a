#pragma once

#include <stdexcept>
#include <string>

namespace emoxgen {

// Common base so callers can catch everything the toolkit throws.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Tensor dimensions do not conform for an operation.
struct ShapeError : Error {
    using Error::Error;
};

// A documented precondition was violated by the caller.
struct ContractError : Error {
    using Error::Error;
};

// An object was used after its lifecycle allows (e.g. backward twice).
struct StateError : Error {
    using Error::Error;
};

// NaN or Inf surfaced in a computation.
struct NumericError : Error {
    using Error::Error;
};

// Index outside a container's valid range.
struct IndexError : Error {
    using Error::Error;
};

// Input data is unusable (empty class, empty corpus, ...).
struct DataError : Error {
    using Error::Error;
};

// A file does not expose the columns/fields a DatasetSpec requires.
struct SchemaError : Error {
    using Error::Error;
};

// Invalid configuration values.
struct ConfigError : Error {
    using Error::Error;
};

// Emotion name outside the active taxonomy.
struct TaxonomyError : Error {
    using Error::Error;
};

// Malformed file contents (fixture CSV, weight file, JSONL).
struct ParseError : Error {
    using Error::Error;
};

// Mathematical domain violation (e.g. percentage change from zero).
struct DomainError : Error {
    using Error::Error;
};

// Exit-code classification used by the CLI: validation errors are the
// user's fault (exit 1), runtime errors are the run's fault (exit 2).
inline bool is_validation_error(const Error& e) {
    return dynamic_cast<const ConfigError*>(&e) != nullptr ||
           dynamic_cast<const ContractError*>(&e) != nullptr ||
           dynamic_cast<const SchemaError*>(&e) != nullptr ||
           dynamic_cast<const ParseError*>(&e) != nullptr ||
           dynamic_cast<const TaxonomyError*>(&e) != nullptr ||
           dynamic_cast<const DomainError*>(&e) != nullptr ||
           dynamic_cast<const ShapeError*>(&e) != nullptr;
}

}  // namespace emoxgen

#pragma once

#include <stdexcept>
#include <string>

namespace gevcast {

/// Invalid argument: wrong sizes, counts out of range, malformed options.
class ArgumentError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A value lies outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// The data carry no information for the requested fit (e.g. all values equal).
class DegenerateDataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A numerical fit could not produce a usable result.
class FitError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input file or persisted-object schema mismatch.
class SchemaError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace gevcast

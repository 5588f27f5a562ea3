#pragma once

#include <stdexcept>
#include <string>

namespace damlab {

// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Operands with incompatible neuron counts, or an index outside [0, N).
class DimensionError : public Error {
public:
    using Error::Error;
};

// Invalid parameter specification (p out of range, missing pool, bad plan).
class SpecError : public Error {
public:
    using Error::Error;
};

// Malformed container: bad magic, unsupported version, wrong record type.
class FormatError : public Error {
public:
    using Error::Error;
};

// Payload shorter or longer than the header promises.
class LengthError : public Error {
public:
    using Error::Error;
};

// Pairwise statistics requested on a set with fewer than two patterns.
class InsufficientPatternsError : public Error {
public:
    using Error::Error;
};

// Filesystem-level failure, carries the offending path in the message.
class IoError : public Error {
public:
    using Error::Error;
};

} // namespace damlab

#pragma once

#include <stdexcept>
#include <string>

namespace cdsite {

/** Base class for every error raised by the library. */
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class UnknownPoint : public Error {
public:
    explicit UnknownPoint(const std::string& id) : Error("unknown point identifier '" + id + "'") {}
};

class NotOpen : public Error {
public:
    using Error::Error;
};

class PreconditionViolated : public Error {
public:
    using Error::Error;
};

class MissingPullback : public Error {
public:
    using Error::Error;
};

class WrongMorphismClass : public Error {
public:
    using Error::Error;
};

class NotACovering : public Error {
public:
    using Error::Error;
};

class DepthExhausted : public Error {
public:
    using Error::Error;
};

/** Raised when an input violates a named invariant (antisymmetry, monotonicity, ...). */
class ValidationError : public Error {
public:
    ValidationError(std::string invariant, const std::string& detail)
        : Error(invariant + ": " + detail), invariant_(std::move(invariant)) {}

    const std::string& invariant() const noexcept { return invariant_; }

private:
    std::string invariant_;
};

class ParseError : public Error {
public:
    using Error::Error;
};

}  // namespace cdsite

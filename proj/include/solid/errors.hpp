#pragma once

#include <chrono>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace solid {

// Base of every error raised by the library. Callers that only need a
// message can catch this; the subclasses exist so the CLI and the
// generation loop can react to specific failure classes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class PreconditionError : public Error {
public:
    using Error::Error;
};

class UnknownIntent : public Error {
public:
    explicit UnknownIntent(const std::string& token)
        : Error("unknown intent: '" + token + "'"), token_(token) {}
    const std::string& token() const noexcept { return token_; }

private:
    std::string token_;
};

class EmptySet : public Error {
public:
    using Error::Error;
};

class InvalidDialog : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    ParseError(const std::string& locus, const std::string& what)
        : Error(locus + ": " + what), locus_(locus) {}
    const std::string& locus() const noexcept { return locus_; }

private:
    std::string locus_;
};

// Backend failures.
class TransportError : public Error {
public:
    using Error::Error;
};

class RateLimited : public Error {
public:
    RateLimited(const std::string& what, std::chrono::milliseconds retry_after)
        : Error(what), retry_after_(retry_after) {}
    std::chrono::milliseconds retry_after() const noexcept { return retry_after_; }

private:
    std::chrono::milliseconds retry_after_;
};

class BadRequest : public Error {
public:
    using Error::Error;
};

// The model answered, but nothing usable survived parsing/filtering.
class DegenerateOutput : public Error {
public:
    using Error::Error;
};

class Unparseable : public Error {
public:
    using Error::Error;
};

class TurnFailure : public Error {
public:
    TurnFailure(std::size_t turn, const std::string& cause)
        : Error("turn " + std::to_string(turn) + " failed: " + cause), turn_(turn) {}
    std::size_t turn() const noexcept { return turn_; }

private:
    std::size_t turn_;
};

class EmptyCorpus : public Error {
public:
    using Error::Error;
};

class OutOfRange : public Error {
public:
    using Error::Error;
};

class SeedMismatch : public Error {
public:
    using Error::Error;
};

class Undersupply : public Error {
public:
    using Error::Error;
};

class EmptyTraining : public Error {
public:
    using Error::Error;
};

class LengthMismatch : public Error {
public:
    using Error::Error;
};

}  // namespace solid

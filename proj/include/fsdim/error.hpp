#pragma once

#include <stdexcept>
#include <string>

namespace fsdim {

// Base for every error raised by the library. The CLI maps these to exit code 2.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class SourceExhausted : public Error {
public:
    SourceExhausted(std::size_t requested, std::size_t available)
        : Error("source exhausted: requested " + std::to_string(requested) + " bits, only " +
                std::to_string(available) + " available (short by " +
                std::to_string(requested - available) + ")"),
          requested_(requested), available_(available) {}

    std::size_t requested() const noexcept { return requested_; }
    std::size_t available() const noexcept { return available_; }

private:
    std::size_t requested_;
    std::size_t available_;
};

class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& detail, const std::string& source = {})
        : Error((source.empty() ? "line " : source + ":") + std::to_string(line) + ": " + detail),
          line_(line), detail_(detail) {}

    std::size_t line() const noexcept { return line_; }
    const std::string& detail() const noexcept { return detail_; }

private:
    std::size_t line_;
    std::string detail_;
};

// A documented precondition of an operation does not hold for the given input.
class PreconditionError : public Error {
public:
    using Error::Error;
};

class ReducibleChain : public PreconditionError {
public:
    using PreconditionError::PreconditionError;
};

}  // namespace fsdim

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace pohammer {

// 1-based position inside a text input.
struct SourceSpan {
    int line = 1;
    int column = 1;
};

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// An element lies outside the domain of a structure.
class DomainError : public Error {
public:
    using Error::Error;
};

// Unknown symbol, clashing symbol or arity mismatch.
class SignatureError : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    ParseError(const std::string& message, SourceSpan span)
        : Error(std::to_string(span.line) + ":" + std::to_string(span.column) + ": " + message),
          span_(span), message_(message) {}

    [[nodiscard]] SourceSpan span() const { return span_; }
    [[nodiscard]] const std::string& bare_message() const { return message_; }

private:
    SourceSpan span_;
    std::string message_;
};

// The input does not satisfy the documented precondition of an operation.
class PreconditionError : public Error {
public:
    using Error::Error;
};

// A search ran out of its node budget or an enumeration exceeded its ceiling.
// Never converted into an answer.
class ResourceError : public Error {
public:
    ResourceError(const std::string& message, std::uint64_t amount)
        : Error(message), amount_(amount) {}

    // Nodes expanded (model checking) or items requested (enumeration).
    [[nodiscard]] std::uint64_t amount() const { return amount_; }

private:
    std::uint64_t amount_;
};

// Distributive CNF/DNF conversion would exceed the clause cap.
class BlowupError : public Error {
public:
    BlowupError(std::uint64_t attempted, std::uint64_t cap)
        : Error("normal form blow-up: " + std::to_string(attempted) + " clauses exceed cap " +
                std::to_string(cap)),
          attempted_(attempted) {}

    [[nodiscard]] std::uint64_t attempted_clauses() const { return attempted_; }

private:
    std::uint64_t attempted_;
};

} // namespace pohammer

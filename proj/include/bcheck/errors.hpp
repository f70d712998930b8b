#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace bcheck {

/// Byte range inside a source text, end exclusive.
struct SourceSpan {
    std::size_t begin = 0;
    std::size_t end = 0;

    bool operator==(const SourceSpan&) const = default;
};

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class SyntaxError : public Error {
public:
    SyntaxError(std::string message, SourceSpan span, std::vector<std::string> expected = {})
        : Error(std::move(message)), span_(span), expected_(std::move(expected)) {}

    const SourceSpan& span() const noexcept { return span_; }
    const std::vector<std::string>& expected() const noexcept { return expected_; }

private:
    SourceSpan span_;
    std::vector<std::string> expected_;
};

/// An `inputchoice` with no branches.
class EmptyChoiceError : public SyntaxError {
public:
    using SyntaxError::SyntaxError;
};

/// A Ctx declaring one variable twice, or one operation with two payloads.
class DuplicateDeclError : public Error {
public:
    using Error::Error;
};

class InvalidPosition : public Error {
public:
    using Error::Error;
};

class RuleShapeMismatch : public Error {
public:
    using Error::Error;
};

class TransportShapeError : public Error {
public:
    using Error::Error;
};

}  // namespace bcheck

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace bns {

// Error domains map onto CLI exit codes: input data problems exit 2,
// configuration/coverage problems exit 3, broken internal invariants exit 4.
enum class ErrorKind : int {
    input = 2,
    config = 3,
    internal = 4,
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const { return kind_; }
    int exit_code() const { return static_cast<int>(kind_); }

private:
    ErrorKind kind_;
};

class MalformedRecord : public Error {
public:
    MalformedRecord(std::uint64_t line, const std::string& reason)
        : Error(ErrorKind::input, "malformed record at line " + std::to_string(line) + ": " + reason),
          line_(line),
          reason_(reason) {}
    std::uint64_t line() const { return line_; }
    const std::string& reason() const { return reason_; }

private:
    std::uint64_t line_;
    std::string reason_;
};

class EmptyInput : public Error {
public:
    explicit EmptyInput(const std::string& what = "input contains no records") : Error(ErrorKind::input, what) {}
};

class NonMonotonicTimestamps : public Error {
public:
    NonMonotonicTimestamps(std::uint64_t line, const std::string& what)
        : Error(ErrorKind::input, "line " + std::to_string(line) + ": " + what), line_(line) {}
    std::uint64_t line() const { return line_; }

private:
    std::uint64_t line_;
};

class IoError : public Error {
public:
    explicit IoError(const std::string& what) : Error(ErrorKind::input, what) {}
};

class CoverageError : public Error {
public:
    explicit CoverageError(const std::string& what) : Error(ErrorKind::config, what) {}
};

class InvalidConfig : public Error {
public:
    explicit InvalidConfig(const std::string& what) : Error(ErrorKind::config, what) {}
};

class InvalidParams : public Error {
public:
    explicit InvalidParams(const std::string& what) : Error(ErrorKind::config, what) {}
};

class InsufficientWindows : public Error {
public:
    explicit InsufficientWindows(const std::string& what) : Error(ErrorKind::config, what) {}
};

class DegenerateBackground : public Error {
public:
    explicit DegenerateBackground(const std::string& what) : Error(ErrorKind::config, what) {}
};

class DimensionMismatch : public Error {
public:
    explicit DimensionMismatch(const std::string& what) : Error(ErrorKind::internal, what) {}
};

}  // namespace bns

#pragma once

#include <stdexcept>
#include <string>

namespace creditnet {

// Error categories map onto CLI exit codes (2 = invalid input, 3 = limit).
enum class ErrorKind { InvalidInput, LimitExceeded, Internal };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

class InvalidInput : public Error {
public:
    explicit InvalidInput(const std::string& what) : Error(ErrorKind::InvalidInput, what) {}
};

class LimitExceeded : public Error {
public:
    explicit LimitExceeded(const std::string& what) : Error(ErrorKind::LimitExceeded, what) {}
};

class InternalError : public Error {
public:
    explicit InternalError(const std::string& what) : Error(ErrorKind::Internal, what) {}
};

} // namespace creditnet

#pragma once

#include <stdexcept>
#include <string>

namespace sbdag {

// Base class for all computational errors raised by the library. The CLI
// maps these to exit code 1 and prints the message verbatim.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class NotPositiveDefinite : public Error {
public:
    explicit NotPositiveDefinite(const std::string& msg = "matrix is not positive definite")
        : Error(msg) {}
};

class DimensionMismatch : public Error {
public:
    explicit DimensionMismatch(const std::string& msg = "dimension mismatch") : Error(msg) {}
};

class SingularFactor : public Error {
public:
    explicit SingularFactor(const std::string& msg = "singular factor") : Error(msg) {}
};

class IndexError : public Error {
public:
    explicit IndexError(const std::string& msg = "index out of range") : Error(msg) {}
};

class NegativeInput : public Error {
public:
    explicit NegativeInput(const std::string& msg = "negative input") : Error(msg) {}
};

class EnumerationTooLarge : public Error {
public:
    explicit EnumerationTooLarge(const std::string& msg = "enumeration too large") : Error(msg) {}
};

class ExactCapExceeded : public Error {
public:
    explicit ExactCapExceeded(const std::string& msg = "exact solver cap exceeded") : Error(msg) {}
};

class DpCapExceeded : public Error {
public:
    explicit DpCapExceeded(const std::string& msg = "dynamic programming cap exceeded") : Error(msg) {}
};

class TooLarge : public Error {
public:
    explicit TooLarge(const std::string& msg = "problem too large") : Error(msg) {}
};

class InvalidArgument : public Error {
public:
    explicit InvalidArgument(const std::string& msg = "invalid argument") : Error(msg) {}
};

}  // namespace sbdag

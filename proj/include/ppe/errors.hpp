#pragma once

#include <stdexcept>
#include <string>

namespace ppe {

// Bad user input: malformed degree sets, windows too small, wrong basis tags.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Exact integer arithmetic left the int64 range.
class OverflowError : public std::overflow_error {
public:
    using std::overflow_error::overflow_error;
};

// A factorization or solve failed where it should not have.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace ppe

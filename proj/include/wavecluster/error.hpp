#pragma once

#include <stdexcept>
#include <string>

namespace wavecluster {

// Caller violated a precondition (bad sizes, out-of-range parameters).
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Input is well formed but carries no usable information, e.g. a constant
// curve whose relative energy contributions are undefined.
class DegenerateInput : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed external data (CSV, binary, JSON).
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace wavecluster

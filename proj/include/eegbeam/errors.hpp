#pragma once

#include <stdexcept>
#include <string>

namespace eegbeam {

// Error taxonomy maps onto process exit codes: parameter -> 2, data -> 3,
// numeric -> 4.
class ParameterError : public std::invalid_argument {
public:
    explicit ParameterError(const std::string& what) : std::invalid_argument(what) {}
};

class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace eegbeam

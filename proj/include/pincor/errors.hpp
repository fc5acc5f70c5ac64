#ifndef PINCOR_ERRORS_HPP
#define PINCOR_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace pincor {

// Runtime failure of a model operation (bad regime, non-normalizable law,
// Cholesky failure, bracket not found, ...). CLI maps these to exit 1.
struct error : std::runtime_error {
    explicit error(const std::string& msg) : std::runtime_error(msg) {}
};

// Violated precondition / malformed request. CLI maps these to exit 2.
struct usage_error : std::invalid_argument {
    explicit usage_error(const std::string& msg) : std::invalid_argument(msg) {}
};

}  // namespace pincor

#endif

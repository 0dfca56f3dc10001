#pragma once

#include <stdexcept>
#include <string>

namespace dppgrpo {

/// Input or configuration violates a documented precondition.
class ValidationError : public std::invalid_argument {
public:
    explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

/// A numerical routine failed on input that passed validation (Cholesky
/// breakdown, eigensolver non-convergence, non-finite gradient).
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace dppgrpo

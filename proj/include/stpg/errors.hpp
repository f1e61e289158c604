#pragma once

#include <stdexcept>
#include <string>

namespace stpg {

/// Raised when a factorization, eigensolve or linear solve breaks down.
class NumericalFailure : public std::runtime_error {
public:
    explicit NumericalFailure(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace stpg

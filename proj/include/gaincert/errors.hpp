#pragma once

#include <stdexcept>
#include <string>

namespace gaincert {

struct SingularMatrixError : std::runtime_error {
    explicit SingularMatrixError(const std::string& what) : std::runtime_error(what) {}
};

struct NotControllableError : std::runtime_error {
    explicit NotControllableError(const std::string& what) : std::runtime_error(what) {}
};

struct ReductionFailureError : std::runtime_error {
    explicit ReductionFailureError(const std::string& what) : std::runtime_error(what) {}
};

struct DuplicateNodeError : std::runtime_error {
    explicit DuplicateNodeError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace gaincert

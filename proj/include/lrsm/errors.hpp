#pragma once

#include <stdexcept>
#include <string>

namespace lrsm {

// Error taxonomy mirrored by the CLI exit codes:
// InputError -> 2, InfeasibleError -> 3, NumericError -> 4.
struct InputError : std::runtime_error {
    explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

struct InfeasibleError : std::runtime_error {
    explicit InfeasibleError(const std::string& what) : std::runtime_error(what) {}
};

struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace lrsm

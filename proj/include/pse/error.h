#pragma once

#include <stdexcept>
#include <string>

namespace pse {

/// Raised for every recoverable failure in the library (bad input, IO, shape mismatch).
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace pse

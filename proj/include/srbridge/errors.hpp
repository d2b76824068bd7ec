#pragma once

#include <stdexcept>
#include <string>

namespace srb {

// Bad user input: unknown config keys, invalid values, incompatible settings.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Runtime numerical failure: path blow-up, non-finite loss, solver stall.
struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace srb

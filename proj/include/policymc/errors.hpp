#pragma once

#include <stdexcept>
#include <string>

namespace policymc {

/// Problems with a model, property, config or checkpoint file.
struct ModelError : std::runtime_error {
    explicit ModelError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Syntax errors carry a source position.
struct ParseError : ModelError {
    int line = 0;
    int column = 0;
    ParseError(const std::string& msg, int line_, int col_)
        : ModelError(msg + " (line " + std::to_string(line_) + ", column " +
                     std::to_string(col_) + ")"),
          line(line_), column(col_) {}
};

/// Problems detected while checking a property (unknown label, bad query).
struct VerifyError : std::runtime_error {
    explicit VerifyError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace policymc

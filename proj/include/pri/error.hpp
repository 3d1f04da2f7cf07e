#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace pri {

// Bad input: malformed records, unknown labels, violated invariants.
// Maps to exit code 2 at the CLI.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
    ValidationError(const std::string& what, std::size_t line)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::optional<std::size_t> line() const { return line_; }

private:
    std::optional<std::size_t> line_;
};

}  // namespace pri

#pragma once

#include <stdexcept>
#include <string>

namespace hvv {

// Shape or dimension mismatch between tensors.
struct DimError : std::runtime_error {
    explicit DimError(const std::string& msg) : std::runtime_error(msg) {}
};

// Invalid argument values (labels out of range, bad enum strings, ...).
struct ValidationError : std::runtime_error {
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Unreadable or unwritable files.
struct IoError : std::runtime_error {
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed file contents (bad JSONL, bad CSV, bad checkpoint container).
struct FormatError : std::runtime_error {
    explicit FormatError(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad configuration (unknown keys, unparsable values, inconsistent shapes).
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Numerical failures: divergence, non-finite values, failed verification.
struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace hvv

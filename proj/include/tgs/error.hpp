#pragma once

#include <stdexcept>

namespace tgs {

// Malformed input bytes: bad JSON, truncated tensor container, unknown enum tag.
struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Well-formed input that violates a schema or domain invariant.
struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Filesystem failure (missing path, unwritable target).
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace tgs

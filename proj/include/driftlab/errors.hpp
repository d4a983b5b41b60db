#pragma once

#include <stdexcept>
#include <string>

namespace driftlab {

// Instance or key does not fit the schema (value out of arity range, bad
// subset shape, arity beyond what packed keys support).
struct SchemaError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A decrement was issued for evidence that is not in the store (window
// discipline violated); effective weight would drop below -1e-9.
struct WindowDisciplineError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A read or update was issued for a step earlier than the last update.
struct TimeTravelError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Invalid configuration value (drift delta >= 1, window < 1, ...).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Two networks with different structure were compared.
struct StructureMismatchError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Data value or dataset outside what the pipeline accepts (non-finite
// numeric, metadata mismatch against the expected benchmark sizes).
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed input file; carries source name and 1-based line number.
struct ParseError : std::runtime_error {
    ParseError(const std::string& source, long line, const std::string& what)
        : std::runtime_error(source + ":" + std::to_string(line) + ": " + what),
          line_number(line) {}
    long line_number;
};

}  // namespace driftlab

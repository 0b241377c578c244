#pragma once

#include <stdexcept>
#include <string>

namespace augbagg {

// Invalid argument values or shape mismatches detected at an API boundary.
struct argument_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Malformed input data (CSV cells, wrong column types, NaN values).
struct format_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A policy forbids the requested handling (e.g. categorical columns under `reject`).
struct policy_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Filesystem-level failures.
struct io_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Experiment configuration problems; message carries the offending field path.
struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace augbagg

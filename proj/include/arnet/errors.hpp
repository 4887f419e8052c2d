#pragma once

#include <stdexcept>
#include <string>

namespace arnet {

// Caller broke an operation precondition (shape mismatch, odd dims, ...).
struct ContractViolation : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Bad user-facing configuration: unknown erasing op names, empty datasets,
// missing paths, invalid architecture parameters.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed input file. The message names the offending field or offset.
struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Non-finite loss or gradient during training. The message names the layer
// or the epoch/batch where the divergence was detected.
struct TrainingDivergence : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Corrupt or inconsistent checkpoint. The message names the failing field.
struct CheckpointError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw ContractViolation(msg);
}

}  // namespace arnet

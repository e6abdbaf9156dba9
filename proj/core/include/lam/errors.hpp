#pragma once

#include <stdexcept>
#include <string>

namespace lam {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Shape disagreement between tensors (messages name both shapes).
struct DimensionError : Error {
    using Error::Error;
};

// Out-of-range index, slice bound, or class label.
struct IndexError : Error {
    using Error::Error;
};

// An operation precondition was violated (non-scalar loss, lo >= hi, ...).
struct ContractError : Error {
    using Error::Error;
};

// Invalid or inconsistent configuration.
struct ConfigError : Error {
    using Error::Error;
};

// Sequence longer than the configured max_seq_len.
struct SequenceLengthError : Error {
    using Error::Error;
};

}  // namespace lam

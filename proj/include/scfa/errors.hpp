#pragma once

#include <stdexcept>
#include <string>

namespace scfa {

// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Input fails the contract of a correlation matrix or data matrix.
struct InvalidInput : Error {
    using Error::Error;
};

// Matrix has an eigenvalue below the PSD tolerance.
struct NotACorrelationMatrix : InvalidInput {
    using InvalidInput::InvalidInput;
};

// A data column has no variance (or is non-finite).
struct ZeroVarianceColumn : InvalidInput {
    int column;  // 0-based
    explicit ZeroVarianceColumn(int col)
        : InvalidInput("column " + std::to_string(col + 1) + " has zero variance"),
          column(col) {}
};

// Weighted combination collapsed to (near) zero norm.
struct DegenerateCombination : Error {
    using Error::Error;
};

// Observed correlation sign contradicts the cancellation weight sign.
struct InconsistentCancellation : Error {
    using Error::Error;
};

// Every variable was declared orphan; nothing to analyze.
struct EmptyModel : Error {
    using Error::Error;
};

// Merged indicator carries no signal (sum of squares <= member count).
struct NoSignal : Error {
    using Error::Error;
};

}  // namespace scfa

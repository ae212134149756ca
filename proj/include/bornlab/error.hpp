// error.hpp
// Error type shared by every bornlab module. The C API maps ErrorCode values
// one-to-one onto bornlab_status.

#pragma once

#include <stdexcept>
#include <string>

namespace bornlab {

enum class ErrorCode {
    InvalidArgument = 1,
    DimensionMismatch,
    NotHermitian,
    NotUnitary,
    NotOrthogonal,
    ZeroProbabilityOutcome,
    AntipodalAmbiguity,
    NumericalResidue,
    StepRejected,
    PositivityLost,
    InsufficientResolved,
    UnresolvedPresent,
    InvalidProjector,
    IncompleteFamily,
    ParseError,
    ValidationError,
    IoError,
};

const char* to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace bornlab

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace setrecon {

enum class Errc {
    ZeroInverse,
    FieldTooLarge,
    DivisionByZeroPolynomial,
    BothZero,
    DuplicatePoint,
    NoSolution,
    VerificationFailed,
    DoesNotSplit,
    RetryLimitExceeded,
    KeyOutOfRange,
    ParamsMismatch,
    DifferenceBoundExceeded,
    OwnerOutOfRange,
    DuplicateParty,
    EmptyRelay,
    GraphTooLarge,
    Disconnected,
    InvalidGraph,
    MalformedMessage,
    ParseError,
    InvalidArgument,
};

std::string_view errc_name(Errc code) noexcept;

/// Single exception type for the library; `code()` identifies the failure class.
class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

/// True for the failures a decoder raises when the real difference exceeded the bound
/// (or the inputs were corrupt).
inline bool is_decode_failure(Errc code) noexcept {
    switch (code) {
    case Errc::NoSolution:
    case Errc::VerificationFailed:
    case Errc::DoesNotSplit:
    case Errc::RetryLimitExceeded:
    case Errc::DifferenceBoundExceeded:
        return true;
    default:
        return false;
    }
}

}  // namespace setrecon

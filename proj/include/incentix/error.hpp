#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace incentix {

enum class ErrorKind {
    EmptySupport,
    NegativeWeight,
    PreferenceViolation,
    ZeroLikelihood,
    CapExceeded,
    DomainError,
    NotPlausible,
    DegenerateAtom,
    UnknownSignal,
    BranchMismatch,
    ExactCapExceeded,
    NonEnumerablePolicy,
    ParseError,
};

inline std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::EmptySupport: return "EmptySupport";
        case ErrorKind::NegativeWeight: return "NegativeWeight";
        case ErrorKind::PreferenceViolation: return "PreferenceViolation";
        case ErrorKind::ZeroLikelihood: return "ZeroLikelihood";
        case ErrorKind::CapExceeded: return "CapExceeded";
        case ErrorKind::DomainError: return "DomainError";
        case ErrorKind::NotPlausible: return "NotPlausible";
        case ErrorKind::DegenerateAtom: return "DegenerateAtom";
        case ErrorKind::UnknownSignal: return "UnknownSignal";
        case ErrorKind::BranchMismatch: return "BranchMismatch";
        case ErrorKind::ExactCapExceeded: return "ExactCapExceeded";
        case ErrorKind::NonEnumerablePolicy: return "NonEnumerablePolicy";
        case ErrorKind::ParseError: return "ParseError";
    }
    return "Unknown";
}

/// Single exception type for the library; callers branch on kind().
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace incentix

#ifndef TRIHAM_ERRORS_HPP
#define TRIHAM_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace triham {

/// Failure kinds surfaced by the library. Schema/parse problems are kept
/// separate from domain failures so callers (CLI, C API) can map them to
/// distinct exit codes.
enum class ErrorKind {
    InvalidArgument,
    Schema,
    SingularDesign,
    NyquistViolation,
    InvalidSequence,
    NonConvergence,
    DegenerateData,
    GridError,
    NoFeatureFound,
    SingularCorrection,
    DimensionCap,
    TruncationError,
    AmbiguousStates,
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

    /// True for schema/parse failures, false for domain failures.
    bool is_schema() const noexcept { return kind_ == ErrorKind::Schema; }

private:
    ErrorKind kind_;
};

inline const char* error_kind_name(ErrorKind k) {
    switch (k) {
        case ErrorKind::InvalidArgument: return "InvalidArgument";
        case ErrorKind::Schema: return "Schema";
        case ErrorKind::SingularDesign: return "SingularDesign";
        case ErrorKind::NyquistViolation: return "NyquistViolation";
        case ErrorKind::InvalidSequence: return "InvalidSequence";
        case ErrorKind::NonConvergence: return "NonConvergence";
        case ErrorKind::DegenerateData: return "DegenerateData";
        case ErrorKind::GridError: return "GridError";
        case ErrorKind::NoFeatureFound: return "NoFeatureFound";
        case ErrorKind::SingularCorrection: return "SingularCorrection";
        case ErrorKind::DimensionCap: return "DimensionCap";
        case ErrorKind::TruncationError: return "TruncationError";
        case ErrorKind::AmbiguousStates: return "AmbiguousStates";
    }
    return "Unknown";
}

}  // namespace triham

#endif

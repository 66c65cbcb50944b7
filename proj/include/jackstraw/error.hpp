#ifndef JACKSTRAW_ERROR_HPP
#define JACKSTRAW_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace jackstraw {

enum class ErrorKind {
    InvalidData,
    InvalidRank,
    DecompositionFailure,
    SingularBasis,
    PerfectFit,
    InvalidRotation,
    InvalidIndex,
    InvalidMode,
    InvalidSample,
    InvalidConfig,
    RefuseResume,
    Parse,
};

inline constexpr std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
    case ErrorKind::InvalidData: return "InvalidData";
    case ErrorKind::InvalidRank: return "InvalidRank";
    case ErrorKind::DecompositionFailure: return "DecompositionFailure";
    case ErrorKind::SingularBasis: return "SingularBasis";
    case ErrorKind::PerfectFit: return "PerfectFit";
    case ErrorKind::InvalidRotation: return "InvalidRotation";
    case ErrorKind::InvalidIndex: return "InvalidIndex";
    case ErrorKind::InvalidMode: return "InvalidMode";
    case ErrorKind::InvalidSample: return "InvalidSample";
    case ErrorKind::InvalidConfig: return "InvalidConfig";
    case ErrorKind::RefuseResume: return "RefuseResume";
    case ErrorKind::Parse: return "Parse";
    }
    return "Unknown";
}

/// Every failure raised by the library carries a machine-readable kind.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
    throw Error(kind, what);
}

} // namespace jackstraw

#endif

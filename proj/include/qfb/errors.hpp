#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace qfb {

enum class Errc {
    NonTimelike,
    OutOfRange,
    BadRegulator,
    WrongVariant,
    RootBracketFailure,
    SuperluminalMirror,
    PointBehindMirror,
    DegenerateMap,
    GSingular,
    NonTimelikeStep,
    NotPSD,
    GridMismatch,
    TooFewMembers,
    MissingJerk,
    NonStationary,
    QuadratureNotConverged,
    InvalidArgument,
    ParseError,
    ValidationError,
    IoError,
};

inline constexpr std::string_view errc_name(Errc c) noexcept
{
    switch (c) {
    case Errc::NonTimelike: return "NonTimelike";
    case Errc::OutOfRange: return "OutOfRange";
    case Errc::BadRegulator: return "BadRegulator";
    case Errc::WrongVariant: return "WrongVariant";
    case Errc::RootBracketFailure: return "RootBracketFailure";
    case Errc::SuperluminalMirror: return "SuperluminalMirror";
    case Errc::PointBehindMirror: return "PointBehindMirror";
    case Errc::DegenerateMap: return "DegenerateMap";
    case Errc::GSingular: return "GSingular";
    case Errc::NonTimelikeStep: return "NonTimelikeStep";
    case Errc::NotPSD: return "NotPSD";
    case Errc::GridMismatch: return "GridMismatch";
    case Errc::TooFewMembers: return "TooFewMembers";
    case Errc::MissingJerk: return "MissingJerk";
    case Errc::NonStationary: return "NonStationary";
    case Errc::QuadratureNotConverged: return "QuadratureNotConverged";
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::ParseError: return "ParseError";
    case Errc::ValidationError: return "ValidationError";
    case Errc::IoError: return "IoError";
    }
    return "Unknown";
}

/// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code)
    {
    }

    Errc code() const noexcept { return code_; }

    /// Parse/validation failures map to exit code 2, the rest to 3.
    bool is_validation() const noexcept
    {
        return code_ == Errc::ParseError || code_ == Errc::ValidationError;
    }

private:
    Errc code_;
};

[[noreturn]] inline void raise(Errc code, const std::string& what) { throw Error(code, what); }

inline void require(bool cond, Errc code, const std::string& what)
{
    if (!cond) raise(code, what);
}

} // namespace qfb

#ifndef HFM_ERRORS_HPP
#define HFM_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace hfm {

/// Coarse failure classes. The numeric values double as process exit codes
/// for the command-line driver and as status codes on the C interface, so
/// they must stay stable.
enum class ErrorCode : int {
    Ok = 0,
    InvalidInput = 2,   ///< bad arguments, malformed config, contract violation
    Diverged = 3,       ///< optimization produced a non-finite loss or gradient
    Io = 4,             ///< file could not be read/written/parsed
    Internal = 5        ///< should-not-happen conditions
};

/// Base exception for everything raised by the library. Carries the coarse
/// class so the C wrapper and the CLI can map it to a status code without
/// string matching.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what_arg)
        : std::runtime_error(what_arg), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

/// A value became NaN/Inf during expression evaluation. Identifies the tape
/// node (or batch point) where the failure was detected.
class NonFiniteError : public Error {
public:
    NonFiniteError(const std::string& what_arg, std::size_t where)
        : Error(ErrorCode::InvalidInput, what_arg), index_(where) {}

    /// Node id or point index at which the non-finite value appeared.
    std::size_t index() const noexcept { return index_; }

private:
    std::size_t index_;
};

/// Optimization left the realm of finite numbers.
class DivergedError : public Error {
public:
    DivergedError(const std::string& what_arg, std::size_t point_index)
        : Error(ErrorCode::Diverged, what_arg), point_(point_index) {}

    /// Batch point index that produced the first non-finite contribution.
    std::size_t point_index() const noexcept { return point_; }

private:
    std::size_t point_;
};

[[noreturn]] inline void throw_invalid(const std::string& msg) {
    throw Error(ErrorCode::InvalidInput, msg);
}

[[noreturn]] inline void throw_io(const std::string& msg) {
    throw Error(ErrorCode::Io, msg);
}

} // namespace hfm

#endif

#pragma once

#include <stdexcept>
#include <string>

namespace ebm {

enum class ErrorCode {
    InvalidParams,
    InvalidOptions,
    ConfigError,
    IoError,
    KinkPoint,
    NegativeInput,
    EpsilonOutOfRange,
    EpsilonNotSupercritical,
    DomainError,
    NotConverged,
    OnRamp,
    Degenerate,
    RangeInvalid,
    NoWarmEquilibrium,
    NotBistable,
    NoEntry,
    CrossCheck,
};

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(what), code_(code) {}
    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void raise(ErrorCode code, const std::string& what) {
    throw Error(code, what);
}

} // namespace ebm

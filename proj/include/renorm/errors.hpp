#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace renorm {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NonConvergent : public Error {
public:
    using Error::Error;
};

class BadGrid : public Error {
public:
    using Error::Error;
};

class OutOfDomain : public Error {
public:
    using Error::Error;
};

class NoSecondDerivative : public Error {
public:
    using Error::Error;
};

/// Raised when an exact-arithmetic operation would need a transcendental value.
class Inexact : public Error {
public:
    using Error::Error;
};

class InvalidFamilyParams : public Error {
public:
    InvalidFamilyParams(const std::string& what, std::string report)
        : Error(what), report_(std::move(report)) {}
    const std::string& report() const noexcept { return report_; }

private:
    std::string report_;
};

class NotRenormalizable : public Error {
public:
    NotRenormalizable(const std::string& what, std::size_t depth)
        : Error(what + " (depth " + std::to_string(depth) + ")"), depth_(depth) {}
    std::size_t depth() const noexcept { return depth_; }

private:
    std::size_t depth_;
};

class HistoryTooShort : public Error {
public:
    using Error::Error;
};

/// Gaps or overlaps between partition atoms; usually means float_bits is too low.
class TilingViolation : public Error {
public:
    TilingViolation(const std::string& what, std::size_t depth)
        : Error(what + " (depth " + std::to_string(depth) + ")"), depth_(depth) {}
    std::size_t depth() const noexcept { return depth_; }

private:
    std::size_t depth_;
};

class InconsistentDepths : public Error {
public:
    using Error::Error;
};

class NotRefining : public Error {
public:
    using Error::Error;
};

class BadLambda : public Error {
public:
    using Error::Error;
};

class GridInadequate : public Error {
public:
    using Error::Error;
};

class SignConventionViolation : public Error {
public:
    using Error::Error;
};

class IncompatibleRuns : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace renorm

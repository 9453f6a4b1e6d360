#pragma once

#include <stdexcept>
#include <string>

namespace bsr {

/// Failure categories shared by every module. The numeric values are the
/// status codes returned through the C API (see bsr.h).
enum class ErrorCode : int {
    kDomain = 1,
    kNoRoot = 2,
    kNonConvergence = 3,
    kRankDeficient = 4,
    kDimensionTooLarge = 5,
    kMissingDirections = 6,
    kNoBracket = 7,
    kDimensionMismatch = 8,
    kConfig = 9,
    kIo = 10,
    kInterrupted = 11,
    kPrecondition = 12,
};

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

class DomainError : public Error {
public:
    explicit DomainError(const std::string& what) : Error(ErrorCode::kDomain, what) {}
};

class NoRootError : public Error {
public:
    explicit NoRootError(const std::string& what) : Error(ErrorCode::kNoRoot, what) {}
};

class NonConvergenceError : public Error {
public:
    explicit NonConvergenceError(const std::string& what)
        : Error(ErrorCode::kNonConvergence, what) {}
};

class RankDeficientError : public Error {
public:
    explicit RankDeficientError(const std::string& what)
        : Error(ErrorCode::kRankDeficient, what) {}
};

class DimensionTooLargeError : public Error {
public:
    explicit DimensionTooLargeError(const std::string& what)
        : Error(ErrorCode::kDimensionTooLarge, what) {}
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(ErrorCode::kConfig, what) {}
};

}  // namespace bsr

/**
 * @file error.hpp
 * @brief Error codes and the exception type shared by every ragkit module.
 */
#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ragkit {

enum class ErrorCode {
    InvalidArgument,
    MalformedTable,
    DuplicateChunkId,
    DimensionMismatch,
    ZeroVector,
    IoError,
    VersionMismatch,
    TransportError,
    RateLimited,
    DimsInconsistent,
    EmptyCompletion,
    UnparseableCompletion,
    CorpusTooSmall,
    EmptyStore,
    EmptyCorpus,
    EmptyValidationSet,
    UnknownGoldId,
    NoStrategyChosen,
    SchemaError,
    MissingGoldChunks,
    ConfigError,
};

std::string_view error_code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

    /// True for failures of an upstream model endpoint.
    bool is_upstream() const noexcept {
        return code_ == ErrorCode::TransportError || code_ == ErrorCode::RateLimited ||
               code_ == ErrorCode::DimsInconsistent || code_ == ErrorCode::EmptyCompletion;
    }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

} // namespace ragkit

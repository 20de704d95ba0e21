/**
 * @file error.cpp
 * @brief Error code names.
 */
#include "ragkit/error.hpp"

namespace ragkit {

std::string_view error_code_name(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::MalformedTable: return "MalformedTable";
    case ErrorCode::DuplicateChunkId: return "DuplicateChunkId";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::ZeroVector: return "ZeroVector";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::VersionMismatch: return "VersionMismatch";
    case ErrorCode::TransportError: return "TransportError";
    case ErrorCode::RateLimited: return "RateLimited";
    case ErrorCode::DimsInconsistent: return "DimsInconsistent";
    case ErrorCode::EmptyCompletion: return "EmptyCompletion";
    case ErrorCode::UnparseableCompletion: return "UnparseableCompletion";
    case ErrorCode::CorpusTooSmall: return "CorpusTooSmall";
    case ErrorCode::EmptyStore: return "EmptyStore";
    case ErrorCode::EmptyCorpus: return "EmptyCorpus";
    case ErrorCode::EmptyValidationSet: return "EmptyValidationSet";
    case ErrorCode::UnknownGoldId: return "UnknownGoldId";
    case ErrorCode::NoStrategyChosen: return "NoStrategyChosen";
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::MissingGoldChunks: return "MissingGoldChunks";
    case ErrorCode::ConfigError: return "ConfigError";
    }
    return "Unknown";
}

} // namespace ragkit

/**
 * @file config.hpp
 * @brief Pipeline configuration file (single JSON document, unknown keys rejected).
 */
#pragma once

#include "ragkit/corpus.hpp"
#include "ragkit/gateway.hpp"
#include "ragkit/ingest.hpp"
#include "ragkit/retrieve.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

namespace ragkit {

struct DatagenConfig {
    std::size_t n_simple = 3;
    std::size_t n_complex = 2;
    std::size_t pool_k = 20;
    std::size_t n_expanded = 5;
    std::size_t batch_size = 16;
    std::uint64_t seed = 42;
};

struct RetrievalConfig {
    Bm25Params bm25;
    double rrf_k = kDefaultRrfK;
    std::size_t fuse_depth = kDefaultFuseDepth;
    std::optional<std::size_t> k_eval; ///< defaults to answer.n_contexts
    std::optional<std::filesystem::path> validation_path;
    std::optional<StrategyKind> strategy; ///< explicit override of the validated choice
};

struct AnswerConfig {
    std::size_t n_contexts = 5;
    int max_tokens = 512;
    double temperature = 0.0;
};

struct ServerConfig {
    std::string host = "127.0.0.1";
    int port = 8080;
    std::optional<std::filesystem::path> static_dir;
};

struct PipelineConfig {
    std::filesystem::path workspace;
    std::optional<std::filesystem::path> corpus_manifest;
    ChunkingPolicy chunking;
    EndpointConfig embedding;
    EndpointConfig generator;
    std::optional<EndpointConfig> judge;
    DatagenConfig datagen;
    RetrievalConfig retrieval;
    AnswerConfig answer;
    ServerConfig server;

    /// The document as written (paths unresolved); embedded in reports.
    nlohmann::ordered_json snapshot = nlohmann::ordered_json::object();

    std::size_t k_eval() const { return retrieval.k_eval.value_or(answer.n_contexts); }

    std::filesystem::path chunks_path() const { return workspace / "chunks.jsonl"; }
    std::filesystem::path corpus_dir() const { return workspace / "corpus"; }
    std::filesystem::path datagen_dir() const { return workspace / "datagen"; }
    std::filesystem::path finetune_dir() const { return workspace / "finetune"; }
    std::filesystem::path reports_dir() const { return workspace / "reports"; }
    std::filesystem::path jobs_journal() const { return workspace / "jobs.jsonl"; }
};

/// Relative paths resolve against `base_dir`. Throws ConfigError.
PipelineConfig parse_config(const nlohmann::json& doc, const std::filesystem::path& base_dir);
PipelineConfig load_config(const std::filesystem::path& path);

/// The snapshot with any credential-looking value removed. Only env var names are ever stored.
nlohmann::ordered_json redacted_config(const PipelineConfig& config);

/// Replaces any occurrence of a configured API key value in `text`.
std::string scrub_secrets(const PipelineConfig& config, std::string text);

} // namespace ragkit

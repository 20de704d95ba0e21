/**
 * @file pipeline.hpp
 * @brief Pipeline stages over a workspace directory, shared by the CLI and the service.
 */
#pragma once

#include "ragkit/answer.hpp"
#include "ragkit/config.hpp"
#include "ragkit/datagen.hpp"
#include "ragkit/evalharness.hpp"
#include "ragkit/logging.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>

namespace ragkit {

struct ModelClients {
    std::shared_ptr<Embedder> embedder;
    std::shared_ptr<ChatModel> generator;
    std::shared_ptr<ChatModel> judge; ///< may be null

    /// HTTP gateways for every configured endpoint.
    static ModelClients from_config(const PipelineConfig& config);
};

struct StageContext {
    const PipelineConfig& config;
    const ModelClients& models;
    const Logger& log;
    std::function<void(double)> progress = [](double) {};
};

struct IngestSummary {
    std::size_t documents = 0;
    std::size_t chunks = 0;
    std::filesystem::path chunks_path;
};
IngestSummary run_ingest(const StageContext& ctx, const std::optional<std::filesystem::path>& manifest_override = {});

struct DatagenSummary {
    std::size_t generated = 0;
    std::size_t validated = 0;
    std::filesystem::path qa_path;
};
/// Reads the ingested chunks, writes datagen/qa_generated.jsonl and datagen/qa.jsonl (validated).
DatagenSummary run_datagen(const StageContext& ctx);

struct IndexSummary {
    std::size_t chunks = 0;
    std::size_t dims = 0;
    std::filesystem::path corpus_dir;
};
/// Embeds and indexes the ingested chunks into a sibling directory, then swaps it into place.
IndexSummary run_index(const StageContext& ctx);

/// Evaluates strategies on the validation set and persists strategy.json. Without a
/// validation set the semantic strategy is locked.
StrategyReport run_choose_strategy(const StageContext& ctx,
                                   const std::optional<std::filesystem::path>& validation_override = {});

struct ExportSummary {
    std::size_t embed_examples = 0;
    std::size_t batches = 0;
    std::size_t triplets = 0;
    std::filesystem::path dir;
};
ExportSummary run_export_ft(const StageContext& ctx);

struct EvalRequest {
    std::filesystem::path dataset;
    AnswerMode mode = AnswerMode::judge;
    std::optional<std::filesystem::path> out_dir; ///< defaults to reports/<dataset stem>
};
/// Writes report.json and report.md; returns the report.
EvalReport run_eval(const StageContext& ctx, const EvalRequest& request, std::filesystem::path* written_dir = nullptr);

std::shared_ptr<const Corpus> load_workspace_corpus(const PipelineConfig& config);
/// Retriever with the configured override, else the persisted choice, locked in.
std::shared_ptr<Retriever> make_retriever(const PipelineConfig& config, std::shared_ptr<const Corpus> corpus,
                                          std::shared_ptr<Embedder> embedder);

AnswerRequest answer_request_from_config(const PipelineConfig& config, std::string question,
                                         std::optional<std::size_t> n = std::nullopt);
/// `{"answer", "contexts":[{"chunk_id","text","score","rank"}]}`
nlohmann::ordered_json answer_to_json(const AnswerResult& result);

} // namespace ragkit

/**
 * @file evalharness.hpp
 * @brief Labeled dataset loading and retrieval/answer evaluation reports.
 */
#pragma once

#include "ragkit/answer.hpp"
#include "ragkit/logging.hpp"
#include "ragkit/retrieve.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace ragkit {

struct EvalItem {
    std::string question;
    std::string gold_answer;
    std::optional<std::vector<std::string>> gold_chunk_ids;
};

struct DatasetLoad {
    std::vector<EvalItem> items;
    std::vector<std::string> errors; ///< "path:line: message" for malformed lines
};

/// JSONL with `{"question","gold_answer","gold_chunk_ids"?}` per line. Malformed
/// lines are collected, not thrown; IoError when the file cannot be read.
DatasetLoad load_dataset_lenient(const std::filesystem::path& path);
/// Throws SchemaError naming the first malformed line.
std::vector<EvalItem> load_dataset(const std::filesystem::path& path);

enum class AnswerMode { exact, judge };
std::string_view answer_mode_name(AnswerMode mode) noexcept;
AnswerMode parse_answer_mode(std::string_view name);

/// Throws MissingGoldChunks when any item lacks gold_chunk_ids.
StrategyReport run_retrieval_eval(const std::vector<EvalItem>& items, std::size_t k, const Retriever& retriever);

struct PerItemResult {
    std::string question;
    std::string gold;
    std::string predicted;
    std::string verdict; ///< "true" | "false" | "invalid" in judge mode; "match" | "mismatch" | "error" in exact mode
    std::string raw;     ///< judge reply or error message
    std::vector<std::string> context_ids;
    std::int64_t latency_ms = 0;
};

struct EvalReport {
    std::string dataset_id;
    std::optional<StrategyReport> retrieval;
    AnswerMode mode = AnswerMode::exact;
    double accuracy = 0.0;
    std::size_t correct_count = 0;
    std::size_t invalid_count = 0;
    std::vector<PerItemResult> per_item;
    nlohmann::ordered_json config_snapshot = nlohmann::ordered_json::object();
    double total_seconds = 0.0;

    /// Everything except `timings` is deterministic for deterministic inputs.
    nlohmann::ordered_json to_json() const;
    std::string to_markdown() const;
    /// Writes report.json and report.md into `dir`.
    void write(const std::filesystem::path& dir) const;
};

struct AnswerEvalOptions {
    AnswerMode mode = AnswerMode::exact;
    AnswerRequest request_template; ///< question is overwritten per item
    std::size_t workers = 1;
};

/// Synthesizes and scores every item. Per-item failures are recorded and the run continues.
EvalReport run_answer_eval(const std::vector<EvalItem>& items, const AnswerEvalOptions& options,
                           const Retriever& retriever, ChatModel& generator, ChatModel* judge_model,
                           const Logger* log = nullptr);

} // namespace ragkit

/**
 * @file answer.hpp
 * @brief Answer synthesis from retrieved contexts and answer scoring.
 */
#pragma once

#include "ragkit/gateway.hpp"
#include "ragkit/retrieve.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ragkit {

struct AnswerRequest {
    std::string question;
    std::size_t n_contexts = 5;
    std::optional<StrategyKind> strategy_override;
    int max_tokens = 512;
    double temperature = 0.0;
};

struct PresentedContext {
    std::string chunk_id;
    std::string text;
    double score = 0.0;
    std::size_t rank = 0;
};

struct AnswerResult {
    std::string answer;
    std::vector<PresentedContext> contexts; ///< retrieval rank order
    std::size_t prompt_chars = 0;
    std::int64_t latency_ms = 0;
};

inline constexpr std::string_view kContextDelimiter = "-----";

/// Context block followed by the question and the answer-only-from-context instruction.
std::string render_answer_prompt(std::string_view question, const std::vector<PresentedContext>& contexts);

/// Throws EmptyCorpus when the corpus has no chunks.
AnswerResult synthesize(const AnswerRequest& request, const Retriever& retriever, ChatModel& model);

/// Lowercase, strip punctuation, drop the articles a/an/the, collapse whitespace.
std::string normalize_answer(std::string_view text);
bool exact_match(std::string_view predicted, std::string_view gold);

struct JudgeItem {
    std::string question;
    std::string gold;
    std::string predicted;
};

struct JudgedAccuracy {
    double accuracy = 0.0;
    std::size_t true_count = 0;
    std::size_t false_count = 0;
    std::size_t invalid_count = 0;
    std::vector<JudgeVerdict> verdicts; ///< one per item, input order
};

/// accuracy = #true / #items. Invalid verdicts (including failed judge calls and
/// empty predictions) count in the denominator only.
JudgedAccuracy judged_accuracy(const std::vector<JudgeItem>& items, ChatModel& judge_model, std::size_t workers = 1);

} // namespace ragkit

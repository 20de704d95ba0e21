/**
 * @file evalharness.cpp
 * @brief Dataset loading and evaluation report assembly.
 */
#include "ragkit/evalharness.hpp"

#include "ragkit/error.hpp"
#include "ragkit/jsonl.hpp"
#include "ragkit/parallel.hpp"
#include "ragkit/text.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>

namespace ragkit {

namespace {

std::string format_fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

} // namespace

DatasetLoad load_dataset_lenient(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::IoError, "cannot read " + path.string());
    DatasetLoad out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        const std::string where = path.string() + ":" + std::to_string(line_no) + ": ";
        try {
            const auto j = nlohmann::json::parse(line);
            if (!j.is_object()) {
                out.errors.push_back(where + "expected a JSON object");
                continue;
            }
            if (!j.contains("question") || !j["question"].is_string() || trim(j["question"].get<std::string>()).empty()) {
                out.errors.push_back(where + "missing or empty \"question\"");
                continue;
            }
            if (!j.contains("gold_answer") || !j["gold_answer"].is_string() ||
                trim(j["gold_answer"].get<std::string>()).empty()) {
                out.errors.push_back(where + "missing or empty \"gold_answer\"");
                continue;
            }
            EvalItem item;
            item.question = j["question"].get<std::string>();
            item.gold_answer = j["gold_answer"].get<std::string>();
            if (j.contains("gold_chunk_ids") && !j["gold_chunk_ids"].is_null()) {
                if (!j["gold_chunk_ids"].is_array()) {
                    out.errors.push_back(where + "\"gold_chunk_ids\" must be an array of strings");
                    continue;
                }
                item.gold_chunk_ids = j["gold_chunk_ids"].get<std::vector<std::string>>();
            }
            out.items.push_back(std::move(item));
        } catch (const nlohmann::json::exception& e) {
            out.errors.push_back(where + e.what());
        }
    }
    return out;
}

std::vector<EvalItem> load_dataset(const std::filesystem::path& path) {
    auto loaded = load_dataset_lenient(path);
    if (!loaded.errors.empty()) {
        std::string message = loaded.errors.front();
        if (loaded.errors.size() > 1) message += " (and " + std::to_string(loaded.errors.size() - 1) + " more)";
        fail(ErrorCode::SchemaError, message);
    }
    return std::move(loaded.items);
}

std::string_view answer_mode_name(AnswerMode mode) noexcept { return mode == AnswerMode::exact ? "exact" : "judge"; }

AnswerMode parse_answer_mode(std::string_view name) {
    if (name == "exact") return AnswerMode::exact;
    if (name == "judge") return AnswerMode::judge;
    fail(ErrorCode::InvalidArgument, "unknown answer mode '" + std::string(name) + "'");
}

StrategyReport run_retrieval_eval(const std::vector<EvalItem>& items, std::size_t k, const Retriever& retriever) {
    std::vector<ValidationItem> validation;
    validation.reserve(items.size());
    for (const auto& item : items) {
        if (!item.gold_chunk_ids || item.gold_chunk_ids->empty()) {
            fail(ErrorCode::MissingGoldChunks, "item has no gold_chunk_ids: " + item.question);
        }
        validation.push_back({item.question, *item.gold_chunk_ids});
    }
    return retriever.evaluate_strategies(validation, k);
}

nlohmann::ordered_json EvalReport::to_json() const {
    nlohmann::ordered_json j;
    j["dataset_id"] = dataset_id;
    if (retrieval) {
        auto r = retrieval->to_json();
        nlohmann::ordered_json mrr = nlohmann::ordered_json::object();
        for (const auto& [kind, value] : retrieval->mrr) mrr[std::string(strategy_name(kind))] = value;
        r["mrr"] = mrr;
        r["n_questions"] = retrieval->n_questions;
        j["retrieval"] = r;
    }
    nlohmann::ordered_json answers;
    answers["mode"] = std::string(answer_mode_name(mode));
    answers["scored_by"] = mode == AnswerMode::judge ? "llm_judge" : "exact_match";
    answers["accuracy"] = accuracy;
    answers["n_items"] = per_item.size();
    answers["correct_count"] = correct_count;
    answers["invalid_count"] = invalid_count;
    j["answers"] = answers;
    nlohmann::ordered_json items = nlohmann::ordered_json::array();
    nlohmann::ordered_json latencies = nlohmann::ordered_json::array();
    for (const auto& it : per_item) {
        nlohmann::ordered_json row;
        row["question"] = it.question;
        row["gold"] = it.gold;
        row["predicted"] = it.predicted;
        row["verdict"] = it.verdict;
        row["raw"] = it.raw;
        row["contexts"] = it.context_ids;
        items.push_back(row);
        latencies.push_back(it.latency_ms);
    }
    j["per_item"] = items;
    j["config_snapshot"] = config_snapshot;
    j["timings"] = {{"total_seconds", total_seconds}, {"per_item_latency_ms", latencies}};
    return j;
}

std::string EvalReport::to_markdown() const {
    std::string md = "# Evaluation report: " + dataset_id + "\n\n";
    if (retrieval) {
        md += "## Retrieval (" + retrieval->metric_name + "@" + std::to_string(retrieval->k_eval) + ")\n\n";
        md += "| strategy | hit rate | MRR |\n| --- | --- | --- |\n";
        for (const auto& [kind, score] : retrieval->per_strategy) {
            const auto mrr = retrieval->mrr.find(kind);
            md += "| " + std::string(strategy_name(kind)) + " | " + format_fixed(score, 4) + " | " +
                  (mrr == retrieval->mrr.end() ? std::string("-") : format_fixed(mrr->second, 4)) + " |\n";
        }
        md += "\nChosen strategy: **" + std::string(strategy_name(retrieval->chosen)) + "**\n\n";
    }
    md += "## Answers\n\n| mode | items | correct | invalid | accuracy |\n| --- | --- | --- | --- | --- |\n";
    md += "| " + std::string(answer_mode_name(mode)) + " | " + std::to_string(per_item.size()) + " | " +
          std::to_string(correct_count) + " | " + std::to_string(invalid_count) + " | " +
          format_fixed(accuracy * 100.0, 1) + "% |\n";
    if (mode == AnswerMode::judge) md += "\nScores are LLM-judge verdicts.\n";
    return md;
}

void EvalReport::write(const std::filesystem::path& dir) const {
    write_json_file(dir / "report.json", to_json());
    write_text_file(dir / "report.md", to_markdown());
}

EvalReport run_answer_eval(const std::vector<EvalItem>& items, const AnswerEvalOptions& options,
                           const Retriever& retriever, ChatModel& generator, ChatModel* judge_model,
                           const Logger* log) {
    if (options.mode == AnswerMode::judge && judge_model == nullptr) {
        fail(ErrorCode::InvalidArgument, "judge mode needs a judge endpoint");
    }
    const auto started = std::chrono::steady_clock::now();
    EvalReport report;
    report.mode = options.mode;
    report.per_item.resize(items.size());
    std::vector<bool> generated(items.size(), false);

    parallel_for(items.size(), options.workers, [&](std::size_t i) {
        auto& row = report.per_item[i];
        row.question = items[i].question;
        row.gold = items[i].gold_answer;
        AnswerRequest request = options.request_template;
        request.question = items[i].question;
        try {
            auto result = synthesize(request, retriever, generator);
            row.predicted = std::move(result.answer);
            row.latency_ms = result.latency_ms;
            for (const auto& c : result.contexts) row.context_ids.push_back(c.chunk_id);
            generated[i] = true;
        } catch (const Error& e) {
            row.raw = std::string("(generation error) ") + e.what();
            log_warn(log, "item " + std::to_string(i + 1) + ": " + e.what());
        }
    });

    if (options.mode == AnswerMode::exact) {
        for (std::size_t i = 0; i < items.size(); ++i) {
            auto& row = report.per_item[i];
            if (!generated[i]) {
                row.verdict = "error";
                ++report.invalid_count;
            } else if (exact_match(row.predicted, row.gold)) {
                row.verdict = "match";
                ++report.correct_count;
            } else {
                row.verdict = "mismatch";
            }
        }
    } else if (!items.empty()) {
        std::vector<JudgeItem> judge_items;
        judge_items.reserve(items.size());
        for (const auto& row : report.per_item) judge_items.push_back({row.question, row.gold, row.predicted});
        const auto judged = judged_accuracy(judge_items, *judge_model, options.workers);
        for (std::size_t i = 0; i < items.size(); ++i) {
            auto& row = report.per_item[i];
            row.verdict = std::string(verdict_name(judged.verdicts[i].verdict));
            if (generated[i]) row.raw = judged.verdicts[i].raw;
        }
        report.correct_count = judged.true_count;
        report.invalid_count = judged.invalid_count;
    }
    report.accuracy = items.empty() ? 0.0 : static_cast<double>(report.correct_count) / static_cast<double>(items.size());
    report.total_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return report;
}

} // namespace ragkit

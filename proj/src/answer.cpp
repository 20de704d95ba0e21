/**
 * @file answer.cpp
 * @brief Top-N answer synthesis, exact match and judged accuracy.
 */
#include "ragkit/answer.hpp"

#include "ragkit/error.hpp"
#include "ragkit/parallel.hpp"
#include "ragkit/prompts.hpp"
#include "ragkit/text.hpp"

#include <chrono>

namespace ragkit {

std::string render_answer_prompt(std::string_view question, const std::vector<PresentedContext>& contexts) {
    std::string block;
    for (std::size_t i = 0; i < contexts.size(); ++i) {
        if (i > 0) {
            block += '\n';
            block += kContextDelimiter;
            block += '\n';
        }
        block += contexts[i].text;
    }
    return prompts::render(prompts::answer().text, {{"contexts", block}, {"question", question}});
}

AnswerResult synthesize(const AnswerRequest& request, const Retriever& retriever, ChatModel& model) {
    if (trim(request.question).empty()) fail(ErrorCode::InvalidArgument, "question is empty");
    if (request.n_contexts == 0) fail(ErrorCode::InvalidArgument, "n_contexts must be >= 1");
    const Corpus& corpus = retriever.corpus();
    if (corpus.chunks.empty()) fail(ErrorCode::EmptyCorpus, "corpus has no chunks");

    const auto started = std::chrono::steady_clock::now();
    const HitList hits = request.strategy_override
                             ? retriever.search(*request.strategy_override, request.question, request.n_contexts)
                             : retriever.retrieve(request.question, request.n_contexts);
    AnswerResult result;
    for (const auto& hit : hits) {
        const Chunk* chunk = corpus.find_chunk(hit.chunk_id);
        if (chunk == nullptr) fail(ErrorCode::InvalidArgument, "retrieved unknown chunk " + hit.chunk_id);
        result.contexts.push_back({hit.chunk_id, chunk->presented_text(), hit.score, hit.rank});
    }
    ChatRequest chat;
    chat.user = render_answer_prompt(request.question, result.contexts);
    chat.temperature = request.temperature;
    chat.max_tokens = request.max_tokens;
    result.prompt_chars = utf8::length(chat.user);
    result.answer = model.generate(chat);
    result.latency_ms = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - started).count();
    return result;
}

std::string normalize_answer(std::string_view text) {
    std::string stripped;
    std::size_t pos = 0;
    while (pos < text.size()) {
        const char32_t cp = utf8::decode(text, pos);
        if (is_word_char(cp)) {
            utf8::append(stripped, to_lower(cp));
        } else if (is_space(cp)) {
            stripped += ' ';
        }
    }
    std::vector<std::string> words;
    std::size_t i = 0;
    while (i < stripped.size()) {
        while (i < stripped.size() && stripped[i] == ' ') ++i;
        std::size_t j = i;
        while (j < stripped.size() && stripped[j] != ' ') ++j;
        if (j > i) {
            std::string word = stripped.substr(i, j - i);
            if (word != "a" && word != "an" && word != "the") words.push_back(std::move(word));
        }
        i = j;
    }
    return join(words, " ");
}

bool exact_match(std::string_view predicted, std::string_view gold) {
    return normalize_answer(predicted) == normalize_answer(gold);
}

JudgedAccuracy judged_accuracy(const std::vector<JudgeItem>& items, ChatModel& judge_model, std::size_t workers) {
    if (items.empty()) fail(ErrorCode::InvalidArgument, "judged accuracy needs at least one item");
    JudgedAccuracy out;
    out.verdicts.resize(items.size());
    parallel_for(items.size(), workers, [&](std::size_t i) {
        const auto& item = items[i];
        if (trim(item.predicted).empty()) {
            out.verdicts[i] = JudgeVerdict{Verdict::Invalid, "(no prediction)"};
            return;
        }
        try {
            out.verdicts[i] = judge(item.question, item.gold, item.predicted, judge_model);
        } catch (const Error& e) {
            out.verdicts[i] = JudgeVerdict{Verdict::Invalid, std::string("(judge error) ") + e.what()};
        }
    });
    for (const auto& v : out.verdicts) {
        switch (v.verdict) {
        case Verdict::True: ++out.true_count; break;
        case Verdict::False: ++out.false_count; break;
        case Verdict::Invalid: ++out.invalid_count; break;
        }
    }
    out.accuracy = static_cast<double>(out.true_count) / static_cast<double>(items.size());
    return out;
}

} // namespace ragkit

/**
 * @file datagen.cpp
 * @brief Fine-tuning data synthesis.
 */
#include "ragkit/datagen.hpp"

#include "ragkit/error.hpp"
#include "ragkit/jsonl.hpp"
#include "ragkit/parallel.hpp"
#include "ragkit/prompts.hpp"
#include "ragkit/rng.hpp"
#include "ragkit/text.hpp"

#include <algorithm>
#include <cctype>
#include <optional>
#include <set>
#include <unordered_set>

namespace ragkit {

namespace {

constexpr double kGenerationTemperature = 0.7;
constexpr int kGenerationMaxTokens = 1024;
constexpr int kValidationMaxTokens = 512;

} // namespace

std::string_view difficulty_name(Difficulty d) noexcept {
    return d == Difficulty::simple ? "simple" : "complex";
}

std::vector<std::string> parse_numbered_list(std::string_view completion) {
    std::vector<std::string> items;
    std::size_t start = 0;
    while (start <= completion.size()) {
        std::size_t end = completion.find('\n', start);
        if (end == std::string_view::npos) end = completion.size();
        const std::string_view line = trim(completion.substr(start, end - start));
        start = end + 1;

        std::size_t i = 0;
        while (i < line.size() && std::isdigit(static_cast<unsigned char>(line[i]))) ++i;
        if (i == 0 || i >= line.size() || (line[i] != '.' && line[i] != ')')) continue;
        const std::string_view item = trim(line.substr(i + 1));
        if (!item.empty()) items.emplace_back(item);
    }
    return items;
}

std::vector<QAPair> generate_qa(const Chunk& chunk, ChatModel& model, std::size_t n_simple, std::size_t n_complex,
                                const Logger* log) {
    std::vector<QAPair> pairs;
    if (n_simple == 0 && n_complex == 0) return pairs;
    if (trim(chunk.core_text).empty()) fail(ErrorCode::InvalidArgument, "chunk " + chunk.chunk_id + " has no text");

    const auto run_class = [&](Difficulty difficulty, std::size_t count) {
        if (count == 0) return;
        const auto& tpl = difficulty == Difficulty::simple ? prompts::qa_simple() : prompts::qa_complex();
        const std::string count_text = std::to_string(count);
        ChatRequest request;
        request.user = prompts::render(tpl.text, {{"count", count_text}, {"context", chunk.core_text}});
        request.temperature = kGenerationTemperature;
        request.max_tokens = kGenerationMaxTokens;
        const auto questions = parse_numbered_list(model.generate(request));
        if (questions.empty()) {
            log_warn(log, "UnparseableCompletion: no numbered list in " + std::string(difficulty_name(difficulty)) +
                              " question reply for " + chunk.chunk_id);
            return;
        }
        for (std::size_t i = 0; i < questions.size() && i < count; ++i) {
            pairs.push_back(QAPair{chunk.chunk_id, questions[i], "", difficulty, false});
        }
    };
    run_class(Difficulty::simple, n_simple);
    run_class(Difficulty::complex, n_complex);
    return pairs;
}

std::optional<std::string> parse_validation_reply(std::string_view reply) {
    const std::string_view text = trim(reply);
    if (text.empty()) return std::nullopt;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        if (to_upper_ascii(trim(text.substr(start, end - start))) == kUnanswerableSentinel) return std::nullopt;
        start = end + 1;
    }
    if (starts_with_ci(text, "ANSWER:")) {
        const std::string_view answer = trim(text.substr(7));
        if (answer.empty()) return std::nullopt;
        return std::string(answer);
    }
    return std::string(text);
}

std::vector<QAPair> validate_qa(const std::vector<QAPair>& pairs, const Corpus& corpus, ChatModel& model,
                                std::size_t workers, const Logger* log) {
    for (const auto& p : pairs) {
        if (corpus.find_chunk(p.chunk_id) == nullptr) fail(ErrorCode::InvalidArgument, "unknown chunk " + p.chunk_id);
    }
    std::vector<std::optional<QAPair>> results(pairs.size());
    parallel_for(pairs.size(), workers, [&](std::size_t i) {
        const QAPair& pair = pairs[i];
        const Chunk* chunk = corpus.find_chunk(pair.chunk_id);
        ChatRequest request;
        request.user = prompts::render(prompts::validate().text,
                                       {{"context", chunk->core_text}, {"question", pair.question}});
        request.temperature = 0.0;
        request.max_tokens = kValidationMaxTokens;
        try {
            auto answer = parse_validation_reply(model.generate(request));
            if (!answer) return;
            QAPair kept = pair;
            kept.answer = std::move(*answer);
            kept.validated = true;
            results[i] = std::move(kept);
        } catch (const Error& e) {
            log_warn(log, "dropping question for " + pair.chunk_id + ": " + e.what());
        }
    });
    std::vector<QAPair> kept;
    for (auto& r : results) {
        if (r) kept.push_back(std::move(*r));
    }
    return kept;
}

std::string mine_hard_negative(std::string_view question, std::string_view positive_chunk_id, const RankFn& rank,
                               std::size_t corpus_size, std::size_t pool_k, std::uint64_t seed) {
    if (corpus_size < 2) fail(ErrorCode::CorpusTooSmall, "hard-negative mining needs at least two chunks");
    if (pool_k == 0) fail(ErrorCode::InvalidArgument, "pool_k must be >= 1");
    const HitList hits = rank(question, pool_k + 1);
    std::vector<std::string_view> pool;
    for (const auto& h : hits) {
        if (h.chunk_id != positive_chunk_id && pool.size() < pool_k) pool.push_back(h.chunk_id);
    }
    if (pool.empty()) fail(ErrorCode::CorpusTooSmall, "retriever returned no candidate besides the positive");
    Rng rng(seed);
    return std::string(pool[uniform_index(rng, pool.size())]);
}

std::vector<FTBatch> build_batches(const std::vector<EmbedFTExample>& examples, std::size_t batch_size,
                                   std::uint64_t seed) {
    if (batch_size < 2) fail(ErrorCode::InvalidArgument, "batch_size must be >= 2");
    std::vector<std::size_t> order(examples.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng rng(seed);
    shuffle_in_place(order, rng);

    struct Building {
        FTBatch batch;
        std::unordered_set<std::string> positives;
        bool closed = false;
    };
    std::vector<Building> batches;
    std::vector<std::size_t> open; // indices into batches, creation order
    for (const std::size_t idx : order) {
        const auto& ex = examples[idx];
        auto slot = std::find_if(open.begin(), open.end(), [&](std::size_t b) {
            return batches[b].positives.count(ex.positive_chunk_id) == 0U;
        });
        std::size_t b = 0;
        if (slot == open.end()) {
            b = batches.size();
            batches.emplace_back();
            open.push_back(b);
            slot = open.end() - 1;
        } else {
            b = *slot;
        }
        auto& target = batches[b];
        target.batch.indices.push_back(idx);
        target.batch.examples.push_back(ex);
        target.positives.insert(ex.positive_chunk_id);
        if (target.batch.size() == batch_size) open.erase(slot);
    }
    std::vector<FTBatch> out;
    out.reserve(batches.size());
    for (auto& b : batches) out.push_back(std::move(b.batch));
    return out;
}

TripletFTExample build_expanded_triplet(const QAPair& pair, const RankFn& rank,
                                        const std::vector<std::string>& all_chunk_ids, std::size_t n,
                                        std::uint64_t seed) {
    if (n == 0) fail(ErrorCode::InvalidArgument, "N must be >= 1");
    std::vector<std::string> ids;
    std::set<std::string> used{pair.chunk_id};
    if (n > 1) {
        for (const auto& hit : rank(pair.question, n)) {
            if (ids.size() + 1 >= n) break;
            if (used.insert(hit.chunk_id).second) ids.push_back(hit.chunk_id);
        }
        for (const auto& id : all_chunk_ids) {
            if (ids.size() + 1 >= n) break;
            if (used.insert(id).second) ids.push_back(id);
        }
    }
    ids.push_back(pair.chunk_id);
    Rng rng(seed);
    shuffle_in_place(ids, rng);

    TripletFTExample ex;
    ex.question = pair.question;
    ex.answer = pair.answer;
    ex.original_position = static_cast<std::size_t>(std::find(ids.begin(), ids.end(), pair.chunk_id) - ids.begin());
    ex.context_chunk_ids = std::move(ids);
    return ex;
}

std::vector<TripletFTExample> build_expanded_triplets(const std::vector<QAPair>& pairs, const RankFn& rank,
                                                      const std::vector<std::string>& all_chunk_ids, std::size_t n,
                                                      std::uint64_t seed) {
    std::vector<TripletFTExample> out;
    out.reserve(pairs.size());
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        out.push_back(build_expanded_triplet(pairs[i], rank, all_chunk_ids, n, derive_seed(seed, i)));
    }
    return out;
}

std::vector<EmbedFTExample> build_embed_examples(const std::vector<QAPair>& pairs, const RankFn& rank,
                                                 std::size_t corpus_size, std::size_t pool_k, std::uint64_t seed) {
    std::vector<EmbedFTExample> out;
    out.reserve(pairs.size());
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const auto& p = pairs[i];
        out.push_back({p.question, p.chunk_id,
                       mine_hard_negative(p.question, p.chunk_id, rank, corpus_size, pool_k, derive_seed(seed, i))});
    }
    return out;
}

void write_qa_jsonl(const std::filesystem::path& path, const std::vector<QAPair>& pairs) {
    std::vector<std::string> lines;
    lines.reserve(pairs.size());
    for (const auto& p : pairs) {
        nlohmann::ordered_json j;
        j["chunk_id"] = p.chunk_id;
        j["question"] = p.question;
        j["answer"] = p.answer;
        j["difficulty"] = std::string(difficulty_name(p.difficulty));
        j["validated"] = p.validated;
        lines.push_back(j.dump());
    }
    write_lines(path, lines);
}

std::vector<QAPair> read_qa_jsonl(const std::filesystem::path& path) {
    std::vector<QAPair> pairs;
    for_each_json_line(path, [&](const nlohmann::json& j, std::size_t line) {
        QAPair p;
        p.chunk_id = j.at("chunk_id").get<std::string>();
        p.question = j.at("question").get<std::string>();
        p.answer = j.value("answer", std::string());
        const std::string difficulty = j.value("difficulty", std::string("simple"));
        if (difficulty != "simple" && difficulty != "complex") {
            fail(ErrorCode::SchemaError, path.string() + ":" + std::to_string(line) + ": bad difficulty");
        }
        p.difficulty = difficulty == "simple" ? Difficulty::simple : Difficulty::complex;
        p.validated = j.value("validated", false);
        pairs.push_back(std::move(p));
    });
    return pairs;
}

void write_finetune_files(const std::filesystem::path& dir, const FineTuneExport& data, const Corpus& corpus) {
    const auto text_of = [&](const std::string& id) -> const Chunk& {
        const Chunk* c = corpus.find_chunk(id);
        if (c == nullptr) fail(ErrorCode::InvalidArgument, "unknown chunk " + id);
        return *c;
    };
    std::vector<std::string> embed_lines;
    for (const auto& ex : data.embed_examples) {
        nlohmann::ordered_json j;
        j["query"] = ex.question;
        j["pos"] = text_of(ex.positive_chunk_id).core_text;
        j["neg"] = text_of(ex.hard_negative_chunk_id).core_text;
        embed_lines.push_back(j.dump());
    }
    std::vector<std::string> batch_lines;
    for (const auto& b : data.batches) {
        nlohmann::ordered_json j;
        j["batch"] = b.indices;
        batch_lines.push_back(j.dump());
    }
    std::vector<std::string> llm_lines;
    for (const auto& t : data.triplets) {
        nlohmann::ordered_json j;
        j["question"] = t.question;
        j["answer"] = t.answer;
        nlohmann::ordered_json contexts = nlohmann::ordered_json::array();
        for (const auto& id : t.context_chunk_ids) contexts.push_back(text_of(id).presented_text());
        j["contexts"] = contexts;
        j["original_position"] = t.original_position;
        llm_lines.push_back(j.dump());
    }
    write_lines(dir / kEmbedFtFile, embed_lines);
    write_lines(dir / kBatchesFile, batch_lines);
    write_lines(dir / kLlmFtFile, llm_lines);
}

} // namespace ragkit

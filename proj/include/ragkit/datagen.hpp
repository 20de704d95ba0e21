/**
 * @file datagen.hpp
 * @brief Synthetic QA generation and validation, hard-negative mining,
 *        duplicate-free batching and expanded-context triplets.
 */
#pragma once

#include "ragkit/corpus.hpp"
#include "ragkit/gateway.hpp"
#include "ragkit/logging.hpp"
#include "ragkit/retrieve.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace ragkit {

enum class Difficulty { simple, complex };

std::string_view difficulty_name(Difficulty d) noexcept;

struct QAPair {
    std::string chunk_id;
    std::string question;
    std::string answer;
    Difficulty difficulty = Difficulty::simple;
    bool validated = false;

    bool operator==(const QAPair&) const = default;
};

struct EmbedFTExample {
    std::string question;
    std::string positive_chunk_id;
    std::string hard_negative_chunk_id;

    bool operator==(const EmbedFTExample&) const = default;
};

struct FTBatch {
    std::vector<std::size_t> indices; ///< positions in the example list
    std::vector<EmbedFTExample> examples;
    std::size_t size() const noexcept { return examples.size(); }
};

struct TripletFTExample {
    std::string question;
    std::string answer;
    std::vector<std::string> context_chunk_ids;
    std::size_t original_position = 0;
};

struct DatagenDefaults {
    static constexpr std::size_t n_simple = 3;
    static constexpr std::size_t n_complex = 2;
    static constexpr std::size_t pool_k = 20;
    static constexpr std::size_t n_expanded = 5;
    static constexpr std::size_t batch_size = 16;
};

inline constexpr std::string_view kUnanswerableSentinel = "UNANSWERABLE";

/// Items of a numbered list ("1. text" or "1) text"), in order.
std::vector<std::string> parse_numbered_list(std::string_view completion);

/// One prompt per non-empty difficulty class. Unparseable completions yield no
/// pairs for that class and a warning.
std::vector<QAPair> generate_qa(const Chunk& chunk, ChatModel& model, std::size_t n_simple, std::size_t n_complex,
                                const Logger* log = nullptr);

/// Answer text from a validation reply, or nullopt for the sentinel or empty output.
std::optional<std::string> parse_validation_reply(std::string_view reply);

/// Keeps pairs the model can answer from their chunk; survivors carry that answer.
/// Per-pair gateway failures drop the pair with a warning.
std::vector<QAPair> validate_qa(const std::vector<QAPair>& pairs, const Corpus& corpus, ChatModel& model,
                                std::size_t workers = 1, const Logger* log = nullptr);

/// Ranked search used for mining and context expansion.
using RankFn = std::function<HitList(std::string_view query, std::size_t k)>;

/// Samples one chunk uniformly from the top-pool_k results for the question,
/// excluding the positive. Throws CorpusTooSmall below two chunks.
std::string mine_hard_negative(std::string_view question, std::string_view positive_chunk_id, const RankFn& rank,
                               std::size_t corpus_size, std::size_t pool_k, std::uint64_t seed);

std::vector<FTBatch> build_batches(const std::vector<EmbedFTExample>& examples, std::size_t batch_size,
                                   std::uint64_t seed);

/// The source chunk plus its top-(N-1) retrieved neighbours, shuffled.
/// `all_chunk_ids` pads the list when retrieval returns too few distinct chunks.
TripletFTExample build_expanded_triplet(const QAPair& pair, const RankFn& rank,
                                        const std::vector<std::string>& all_chunk_ids, std::size_t n,
                                        std::uint64_t seed);

std::vector<TripletFTExample> build_expanded_triplets(const std::vector<QAPair>& pairs, const RankFn& rank,
                                                      const std::vector<std::string>& all_chunk_ids, std::size_t n,
                                                      std::uint64_t seed);

std::vector<EmbedFTExample> build_embed_examples(const std::vector<QAPair>& pairs, const RankFn& rank,
                                                 std::size_t corpus_size, std::size_t pool_k, std::uint64_t seed);

void write_qa_jsonl(const std::filesystem::path& path, const std::vector<QAPair>& pairs);
std::vector<QAPair> read_qa_jsonl(const std::filesystem::path& path);

/// Writes embed_ft.jsonl, batches.jsonl and llm_ft.jsonl with chunk ids resolved to texts.
struct FineTuneExport {
    std::vector<EmbedFTExample> embed_examples;
    std::vector<FTBatch> batches;
    std::vector<TripletFTExample> triplets;
};
void write_finetune_files(const std::filesystem::path& dir, const FineTuneExport& data, const Corpus& corpus);

inline constexpr std::string_view kEmbedFtFile = "embed_ft.jsonl";
inline constexpr std::string_view kBatchesFile = "batches.jsonl";
inline constexpr std::string_view kLlmFtFile = "llm_ft.jsonl";

} // namespace ragkit

/**
 * @file retrieve.hpp
 * @brief Dense, BM25 and reciprocal-rank-fusion retrieval with validation-driven
 *        strategy selection.
 */
#pragma once

#include "ragkit/corpus.hpp"
#include "ragkit/gateway.hpp"

#include <nlohmann/json.hpp>

#include <atomic>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ragkit {

struct ScoredHit {
    std::string chunk_id;
    double score = 0.0;
    std::size_t rank = 0; ///< 1-based

    bool operator==(const ScoredHit&) const = default;
};

using HitList = std::vector<ScoredHit>;

enum class StrategyKind { semantic, bm25, hybrid };

std::string_view strategy_name(StrategyKind kind) noexcept;
StrategyKind parse_strategy(std::string_view name);

inline constexpr double kDefaultRrfK = 60.0;
inline constexpr std::size_t kDefaultFuseDepth = 50;

struct RetrievalStrategy {
    StrategyKind kind = StrategyKind::semantic;
    double rrf_k = kDefaultRrfK;
    std::size_t fuse_depth = kDefaultFuseDepth;
};

/// Sorts by score descending then chunk_id ascending, keeps `k` and assigns ranks.
HitList rank_top_k(std::vector<std::pair<std::string, double>> scored, std::size_t k);

/// Cosine top-k over every stored vector. Throws EmptyStore.
HitList cosine_top_k(std::span<const float> query, const EmbeddingStore& store, std::size_t k);

/// Okapi BM25 over the analyzed query terms (duplicates count once per occurrence).
/// Chunks with zero score are omitted.
HitList bm25_search(std::string_view query, std::size_t k, const InvertedIndex& index);
HitList bm25_search_terms(const std::vector<std::string>& query_terms, std::size_t k, const InvertedIndex& index);

/// score(d) = sum over lists containing d of 1 / (rrf_k + rank).
HitList rrf_fuse(const std::vector<HitList>& lists, double rrf_k, std::size_t k);

struct StrategyReport {
    std::string metric_name = "hit_rate";
    std::size_t k_eval = 5;
    std::map<StrategyKind, double> per_strategy;
    std::map<StrategyKind, double> mrr;
    StrategyKind chosen = StrategyKind::semantic;
    std::size_t n_questions = 0;

    /// `{"metric","k","scores":{...},"chosen"}`
    nlohmann::ordered_json to_json() const;
    static StrategyReport from_json(const nlohmann::json& j);
    void save(const std::filesystem::path& path) const;
    static StrategyReport load(const std::filesystem::path& path);
};

inline constexpr std::string_view kStrategyFile = "strategy.json";

/// argmax with ties resolved semantic > hybrid > bm25.
StrategyKind choose_strategy(const std::map<StrategyKind, double>& scores);

struct ValidationItem {
    std::string question;
    std::vector<std::string> gold_chunk_ids;
};

/// Read-only retrieval over a loaded corpus. Safe for concurrent queries; the
/// locked strategy is swapped atomically.
class Retriever {
public:
    Retriever(std::shared_ptr<const Corpus> corpus, std::shared_ptr<Embedder> embedder,
              RetrievalStrategy defaults = {});

    HitList semantic_search(std::string_view query, std::size_t k) const;
    HitList bm25_search(std::string_view query, std::size_t k) const;
    HitList hybrid_search(std::string_view query, std::size_t k) const;
    HitList search(StrategyKind kind, std::string_view query, std::size_t k) const;

    /// Uses the locked strategy. Throws NoStrategyChosen when none is locked.
    HitList retrieve(std::string_view query, std::size_t k) const;

    void lock_strategy(StrategyKind kind);
    std::optional<StrategyKind> locked_strategy() const;

    /// Hit-rate@k_eval (and MRR) for every strategy; does not lock anything.
    StrategyReport evaluate_strategies(const std::vector<ValidationItem>& validation, std::size_t k_eval) const;

    const Corpus& corpus() const noexcept { return *corpus_; }
    const RetrievalStrategy& defaults() const noexcept { return defaults_; }

private:
    std::shared_ptr<const Corpus> corpus_;
    std::shared_ptr<Embedder> embedder_;
    RetrievalStrategy defaults_;
    std::atomic<int> locked_{-1};
};

} // namespace ragkit

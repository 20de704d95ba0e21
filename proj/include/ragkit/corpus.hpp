/**
 * @file corpus.hpp
 * @brief Chunk persistence, the BM25 inverted index and the exact dense embedding store.
 */
#pragma once

#include "ragkit/ingest.hpp"
#include "ragkit/text.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace ragkit {

struct Bm25Params {
    double k1 = 1.2;
    double b = 0.75;

    bool operator==(const Bm25Params&) const = default;
};

struct Posting {
    std::uint32_t doc = 0; ///< index into InvertedIndex::chunk_ids()
    std::uint32_t tf = 0;

    bool operator==(const Posting&) const = default;
};

/// Okapi BM25 index over analyzed chunk core text. Documents are numbered in
/// ascending chunk_id order, so posting lists sorted by document number are
/// also sorted by chunk_id.
class InvertedIndex {
public:
    InvertedIndex() = default;

    static InvertedIndex build(const std::vector<Chunk>& chunks, Bm25Params params = {});
    /// Builds from pre-analyzed documents; `docs` pairs chunk_id with its terms.
    static InvertedIndex build_from_terms(std::vector<std::pair<std::string, std::vector<std::string>>> docs,
                                          Bm25Params params = {});

    std::size_t n_docs() const noexcept { return chunk_ids_.size(); }
    double avgdl() const noexcept { return avgdl_; }
    const Bm25Params& params() const noexcept { return params_; }
    const std::vector<std::string>& chunk_ids() const noexcept { return chunk_ids_; }
    const std::vector<std::uint32_t>& doc_lengths() const noexcept { return doc_len_; }
    const std::map<std::string, std::vector<Posting>, std::less<>>& postings() const noexcept { return postings_; }

    std::uint32_t doc_len(std::string_view chunk_id) const;
    /// Empty span when the term is not indexed.
    std::span<const Posting> postings_for(std::string_view term) const;
    std::size_t df(std::string_view term) const { return postings_for(term).size(); }
    /// ln(1 + (N - df + 0.5) / (df + 0.5))
    double idf(std::string_view term) const;

    void save(const std::filesystem::path& path) const;
    static InvertedIndex load(const std::filesystem::path& path);

    bool operator==(const InvertedIndex&) const = default;

private:
    Bm25Params params_;
    std::vector<std::string> chunk_ids_;
    std::vector<std::uint32_t> doc_len_;
    double avgdl_ = 0.0;
    std::map<std::string, std::vector<Posting>, std::less<>> postings_;
};

/// Exact (brute-force) store of float32 embeddings keyed by chunk_id.
class EmbeddingStore {
public:
    explicit EmbeddingStore(std::size_t dims = 0) : dims_(dims) {}

    std::size_t dims() const noexcept { return dims_; }
    std::size_t size() const noexcept { return ids_.size(); }
    bool empty() const noexcept { return ids_.empty(); }

    /// Inserts or replaces. Throws DimensionMismatch or ZeroVector; on error the store is unchanged.
    void upsert(const std::vector<std::pair<std::string, std::vector<float>>>& pairs);
    void upsert(const std::string& chunk_id, std::span<const float> vector);

    const std::vector<std::string>& ids() const noexcept { return ids_; }
    std::span<const float> vector(std::size_t row) const {
        return {data_.data() + row * dims_, dims_};
    }
    double norm(std::size_t row) const { return norms_[row]; }
    std::optional<std::size_t> row_of(std::string_view chunk_id) const;

    /// Writes `<stem>.f32` (row-major float32, little-endian) and `<stem>.ids`.
    void save(const std::filesystem::path& f32_path, const std::filesystem::path& ids_path) const;
    static EmbeddingStore load(const std::filesystem::path& f32_path, const std::filesystem::path& ids_path,
                               std::size_t dims);

    bool operator==(const EmbeddingStore& other) const;

private:
    std::size_t dims_;
    std::vector<std::string> ids_;
    std::unordered_map<std::string, std::size_t> rows_;
    std::vector<float> data_;
    std::vector<double> norms_;
};

double euclidean_norm(std::span<const float> v) noexcept;

struct CorpusManifest {
    std::string corpus_id;
    std::size_t chunk_count = 0;
    std::string embedding_model_id;
    std::size_t embedding_dims = 0;
    std::string analyzer_version{kAnalyzerVersion};
    std::string created_at; ///< ISO-8601 UTC

    bool operator==(const CorpusManifest&) const = default;
};

/// Everything retrieval needs, immutable once built or loaded.
struct Corpus {
    CorpusManifest manifest;
    std::vector<Chunk> chunks;
    InvertedIndex bm25;
    EmbeddingStore embeddings;

    const Chunk* find_chunk(std::string_view chunk_id) const;
    void rebuild_lookup();

private:
    std::unordered_map<std::string, std::size_t> lookup_;
};

inline constexpr std::string_view kManifestFile = "manifest.json";
inline constexpr std::string_view kChunksFile = "chunks.jsonl";
inline constexpr std::string_view kBm25File = "bm25.bin";
inline constexpr std::string_view kEmbeddingsFile = "embeddings.f32";
inline constexpr std::string_view kEmbeddingIdsFile = "embeddings.ids";

/// Checks the manifest invariants, then writes the five corpus files into `dir`.
void save_corpus(const std::filesystem::path& dir, const Corpus& corpus);
/// Throws IoError for a missing directory and VersionMismatch when the stored
/// analyzer differs from `expected_analyzer`.
Corpus load_corpus(const std::filesystem::path& dir, std::string_view expected_analyzer = kAnalyzerVersion);

std::string utc_timestamp();

} // namespace ragkit

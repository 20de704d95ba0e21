/**
 * @file ingest.hpp
 * @brief Converts parser outputs into Markdown blocks and overlap-augmented chunks.
 */
#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ragkit {

struct SourceDocument {
    std::string doc_id;
    std::string structured_markup;
    std::optional<std::string> clean_text;
    std::string origin_uri;
};

enum class BlockKind { heading, paragraph, list, table, code };

std::string_view block_kind_name(BlockKind kind) noexcept;

struct ParsedBlock {
    BlockKind kind = BlockKind::paragraph;
    int heading_level = 0; ///< 1..6 for headings, 0 otherwise
    std::string markdown;
    std::size_t ordinal = 0;

    bool operator==(const ParsedBlock&) const = default;
};

struct Chunk {
    std::string chunk_id;
    std::string doc_id;
    std::string core_text;
    std::string prelude;
    std::string postlude;
    std::size_t first_ordinal = 0;
    std::size_t last_ordinal = 0;
    std::size_t char_len = 0; ///< code points in core_text

    /// Text presented to an answering model: overlap plus core.
    std::string presented_text() const;

    bool operator==(const Chunk&) const = default;
};

struct ChunkingPolicy {
    std::size_t target_chars = 1200;
    std::size_t max_chars = 2400;
    std::size_t overlap_budget = 200;

    /// Throws InvalidArgument unless 0 < target_chars <= max_chars.
    void validate() const;
};

inline constexpr std::string_view kBlockJoiner = "\n\n";
inline constexpr double kAlignmentThreshold = 0.85;

/// Renders one `<table>` element as a Markdown pipe table.
/// Throws MalformedTable when the table has no row with cells.
std::string table_to_markdown(std::string_view table_markup);

/// Block structure from the structured markup alone.
std::vector<ParsedBlock> parse_blocks(std::string_view structured_markup);

/// Structured blocks with non-table text replaced by matching clean-text segments.
std::vector<ParsedBlock> align_outputs(const SourceDocument& source,
                                       double threshold = kAlignmentThreshold);

/// The clean-text span that best matches `block_text`, if its similarity reaches `threshold`.
struct AlignmentMatch {
    std::string text;
    double similarity = 0.0;
};
std::optional<AlignmentMatch> best_clean_match(std::string_view block_text,
                                               std::string_view clean_text,
                                               double threshold = kAlignmentThreshold);

/// Greedy whole-block chunking. Preludes and postludes are left empty.
std::vector<Chunk> chunk_document(std::string_view doc_id, const std::vector<ParsedBlock>& blocks,
                                  const ChunkingPolicy& policy);

std::vector<Chunk> attach_overlap(std::vector<Chunk> chunks, const ChunkingPolicy& policy);

/// Suffix of `text` of at most `budget` code points that starts on a word boundary.
std::string overlap_tail(std::string_view text, std::size_t budget);
/// Prefix of `text` of at most `budget` code points that ends on a word boundary.
std::string overlap_head(std::string_view text, std::size_t budget);

std::string chunk_id_for(std::string_view doc_id, std::size_t index, std::size_t total);

/// align_outputs + chunk_document + attach_overlap.
std::vector<Chunk> ingest_document(const SourceDocument& source, const ChunkingPolicy& policy);

struct IngestManifest {
    std::string corpus_id;
    std::vector<SourceDocument> documents; ///< ordered by doc_id
};

/// Reads `{"corpus_id", "documents": {doc_id: {"markup", "clean_text"?, "origin_uri"?}}}`.
/// File paths resolve against the manifest's directory.
IngestManifest load_ingest_manifest(const std::filesystem::path& manifest_path);

void write_chunks_jsonl(const std::filesystem::path& path, const std::vector<Chunk>& chunks);
std::vector<Chunk> read_chunks_jsonl(const std::filesystem::path& path);
std::string chunk_to_json_line(const Chunk& chunk);

} // namespace ragkit

/**
 * @file ingest.cpp
 * @brief Block extraction, table rendering, parser-output alignment and chunking.
 */
#include "ragkit/ingest.hpp"

#include "ragkit/error.hpp"
#include "ragkit/html.hpp"
#include "ragkit/jsonl.hpp"
#include "ragkit/text.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <unordered_map>

namespace ragkit {

namespace {

using html::Node;

constexpr std::size_t kMaxColspan = 64;

bool is_one_of(std::string_view tag, std::initializer_list<std::string_view> names) {
    return std::find(names.begin(), names.end(), tag) != names.end();
}

bool is_inline(std::string_view tag) {
    return is_one_of(tag, {"a", "abbr", "b", "bdi", "bdo", "br", "cite", "code", "data", "del", "dfn", "em",
                           "font", "i", "ins", "kbd", "label", "mark", "q", "s", "samp", "small", "span",
                           "strike", "strong", "sub", "sup", "time", "tt", "u", "var"});
}

bool is_container(std::string_view tag) {
    return is_one_of(tag, {"#root", "html", "body", "div", "section", "article", "main", "header", "footer",
                           "nav", "aside", "blockquote", "figure", "figcaption", "center", "form", "fieldset",
                           "details", "summary", "dl", "dd", "dt"});
}

bool is_skipped(std::string_view tag) {
    return is_one_of(tag, {"head", "script", "style", "title", "meta", "link", "img", "hr", "svg", "noscript",
                           "template", "iframe", "object", "embed", "canvas"});
}

int heading_level_of(std::string_view tag) {
    if (tag.size() == 2 && tag[0] == 'h' && tag[1] >= '1' && tag[1] <= '6') return tag[1] - '0';
    return 0;
}

std::string escape_cell(std::string_view text) {
    std::string out;
    for (const char c : collapse_whitespace(text)) {
        if (c == '|') out += '\\';
        out += c;
    }
    return out;
}

void collect_rows(const Node& node, std::vector<const Node*>& rows) {
    for (const auto& child : node.children) {
        if (child->is_text || child->tag == "table") continue;
        if (child->tag == "tr") {
            rows.push_back(child.get());
        } else {
            collect_rows(*child, rows);
        }
    }
}

std::string render_table(const Node& table) {
    std::vector<const Node*> row_nodes;
    collect_rows(table, row_nodes);
    std::vector<std::vector<std::string>> rows;
    for (const Node* tr : row_nodes) {
        std::vector<std::string> cells;
        for (const auto& cell : tr->children) {
            if (cell->is_text || (cell->tag != "td" && cell->tag != "th")) continue;
            cells.push_back(escape_cell(html::text_content(*cell)));
            std::size_t span = 1;
            try {
                const std::string raw = cell->attr("colspan");
                if (!raw.empty()) span = std::clamp<std::size_t>(std::stoul(raw), 1, kMaxColspan);
            } catch (const std::exception&) {
                span = 1;
            }
            for (std::size_t k = 1; k < span; ++k) cells.emplace_back();
        }
        if (!cells.empty()) rows.push_back(std::move(cells));
    }
    if (rows.empty()) fail(ErrorCode::MalformedTable, "table has no rows with cells");

    std::size_t columns = 0;
    for (const auto& r : rows) columns = std::max(columns, r.size());

    const auto render_row = [&](const std::vector<std::string>& cells) {
        std::string line = "|";
        for (std::size_t c = 0; c < columns; ++c) {
            line += ' ';
            if (c < cells.size()) line += cells[c];
            line += " |";
        }
        return line;
    };

    std::string out = render_row(rows.front());
    out += "\n|";
    for (std::size_t c = 0; c < columns; ++c) out += " --- |";
    for (std::size_t r = 1; r < rows.size(); ++r) {
        out += '\n';
        out += render_row(rows[r]);
    }
    return out;
}

/// Finds clean-text segments similar to structured-parser text.
class CleanTextMatcher {
public:
    CleanTextMatcher(std::string_view clean_text, double threshold)
        : clean_(clean_text), threshold_(threshold), tokens_(analyze_with_spans(clean_text)) {
        ids_.reserve(tokens_.size());
        lengths_.reserve(tokens_.size());
        for (const auto& t : tokens_) {
            const auto [it, inserted] = vocab_.emplace(t.term, static_cast<int>(vocab_.size()));
            ids_.push_back(it->second);
            lengths_.push_back(utf8::length(t.term));
            if (!joined_.empty()) joined_.push_back(U' ');
            joined_ += to_u32(t.term);
            token_ends_.push_back(joined_.size());
        }
    }

    std::optional<AlignmentMatch> match(std::string_view block_text) const {
        const auto block_tokens = analyze(block_text);
        const std::size_t m = block_tokens.size();
        if (m == 0 || tokens_.empty()) return std::nullopt;

        const std::u32string target = to_u32(join(block_tokens, " "));
        std::unordered_map<int, int> need;
        for (const auto& t : block_tokens) {
            if (const auto it = vocab_.find(t); it != vocab_.end()) ++need[it->second];
        }
        const std::size_t min_shared = m <= 1 ? 0 : (m <= 3 ? 1 : (m + 3) / 4);

        struct Candidate {
            std::size_t start;
            std::size_t width;
        };
        std::vector<Candidate> best;
        double best_score = -1.0;
        // Lower bound on the distance of every window ending at a given offset.
        const EditDistancePattern pattern(target);
        const auto floor_at_end = pattern.infix_distances(joined_);

        const std::size_t w_lo = m > 2 ? m - 2 : 1;
        const std::size_t w_hi = std::min(m + 2, tokens_.size());
        for (std::size_t w = w_lo; w <= w_hi; ++w) {
            std::unordered_map<int, int> have;
            std::size_t shared = 0;
            std::size_t window_len = 0;
            const auto add = [&](std::size_t idx) {
                const int id = ids_[idx];
                window_len += lengths_[idx];
                if (const auto it = need.find(id); it != need.end()) {
                    if (have[id] < it->second) ++shared;
                    ++have[id];
                }
            };
            const auto remove = [&](std::size_t idx) {
                const int id = ids_[idx];
                window_len -= lengths_[idx];
                if (const auto it = need.find(id); it != need.end()) {
                    --have[id];
                    if (have[id] < it->second) --shared;
                }
            };
            for (std::size_t i = 0; i < w; ++i) add(i);
            for (std::size_t start = 0; start + w <= tokens_.size(); ++start) {
                if (start > 0) {
                    remove(start - 1);
                    add(start + w - 1);
                }
                if (shared < min_shared) continue;
                const std::size_t len = window_len + (w - 1);
                const std::size_t longest = std::max(len, target.size());
                const auto bound = static_cast<std::size_t>(std::floor((1.0 - threshold_) * static_cast<double>(longest) + 1e-9));
                const std::size_t diff = len > target.size() ? len - target.size() : target.size() - len;
                if (diff > bound) continue;
                const std::size_t end = token_ends_[start + w - 1];
                if (floor_at_end[end] > bound) continue;
                const std::u32string_view window_text(joined_.data() + end - len, len);
                const std::size_t d = pattern.distance(window_text);
                if (d > bound) continue;
                const double score = 1.0 - static_cast<double>(d) / static_cast<double>(longest);
                if (score > best_score + 1e-12) {
                    best_score = score;
                    best.clear();
                }
                if (std::abs(score - best_score) <= 1e-12 && best.size() < 64) best.push_back({start, w});
            }
        }
        if (best.empty() || best_score < threshold_) return std::nullopt;

        // Among equally similar windows prefer the one closest in raw form, then the earliest.
        const std::string raw_block = collapse_whitespace(block_text);
        std::string chosen;
        double chosen_raw = -1.0;
        std::size_t chosen_start = 0;
        for (const auto& c : best) {
            std::string candidate = span_text(c.start, c.width);
            const double raw = normalized_similarity(raw_block, candidate);
            if (raw > chosen_raw + 1e-12 || (std::abs(raw - chosen_raw) <= 1e-12 && c.start < chosen_start)) {
                chosen_raw = raw;
                chosen_start = c.start;
                chosen = std::move(candidate);
            }
        }
        return AlignmentMatch{std::move(chosen), best_score};
    }

private:
    std::string span_text(std::size_t start, std::size_t width) const {
        std::size_t b = tokens_[start].begin;
        std::size_t e = tokens_[start + width - 1].end;
        const auto is_ws = [](char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; };
        while (b > 0 && !is_ws(clean_[b - 1])) --b;
        while (e < clean_.size() && !is_ws(clean_[e])) ++e;
        return collapse_whitespace(clean_.substr(b, e - b));
    }

    std::string_view clean_;
    double threshold_;
    std::vector<TokenSpan> tokens_;
    std::vector<int> ids_;
    std::vector<std::size_t> lengths_;
    std::u32string joined_;              ///< tokens joined by single spaces
    std::vector<std::size_t> token_ends_; ///< end offset of each token in joined_
    std::unordered_map<std::string, int> vocab_;
};

class BlockExtractor {
public:
    explicit BlockExtractor(const CleanTextMatcher* matcher) : matcher_(matcher) {}

    std::vector<ParsedBlock> run(const Node& root) {
        walk(root);
        flush_inline();
        return std::move(blocks_);
    }

private:
    std::string aligned(std::string text) const {
        if (matcher_ == nullptr) return text;
        if (auto hit = matcher_->match(text)) return std::move(hit->text);
        return text;
    }

    void emit(BlockKind kind, std::string markdown, int level = 0) {
        ParsedBlock block;
        block.kind = kind;
        block.heading_level = level;
        block.markdown = std::move(markdown);
        block.ordinal = blocks_.size();
        blocks_.push_back(std::move(block));
    }

    void emit_paragraph(std::string_view raw) {
        std::string text = collapse_whitespace(raw);
        if (text.empty()) return;
        emit(BlockKind::paragraph, aligned(std::move(text)));
    }

    void flush_inline() {
        if (!inline_.empty()) emit_paragraph(inline_);
        inline_.clear();
    }

    void walk(const Node& node) {
        for (const auto& child_ptr : node.children) {
            const Node& child = *child_ptr;
            if (child.is_text) {
                inline_ += child.text;
                continue;
            }
            const std::string& tag = child.tag;
            if (is_skipped(tag)) continue;
            if (is_inline(tag)) {
                inline_ += tag == "br" ? std::string("\n") : html::text_content(child);
                continue;
            }
            flush_inline();
            if (const int level = heading_level_of(tag); level > 0) {
                std::string text = collapse_whitespace(html::text_content(child));
                if (!text.empty()) emit(BlockKind::heading, std::string(level, '#') + " " + aligned(std::move(text)), level);
            } else if (tag == "p") {
                emit_paragraph(html::text_content(child));
            } else if (tag == "ul" || tag == "ol") {
                std::vector<std::string> lines;
                render_list(child, 0, lines);
                if (!lines.empty()) emit(BlockKind::list, join(lines, "\n"));
            } else if (tag == "table") {
                try {
                    emit(BlockKind::table, render_table(child));
                } catch (const Error&) {
                    emit_paragraph(html::text_content(child));
                }
            } else if (tag == "pre") {
                std::string code = html::text_content(child);
                while (!code.empty() && (code.back() == '\n' || code.back() == '\r')) code.pop_back();
                while (!code.empty() && code.front() == '\n') code.erase(code.begin());
                if (!trim(code).empty()) emit(BlockKind::code, "```\n" + code + "\n```");
            } else if (is_container(tag)) {
                walk(child);
                flush_inline();
            } else {
                emit_paragraph(html::text_content(child));
            }
        }
    }

    void render_list(const Node& list, std::size_t depth, std::vector<std::string>& lines) {
        const bool ordered = list.tag == "ol";
        std::size_t number = 0;
        for (const auto& item : list.children) {
            if (item->is_text) continue;
            if (item->tag == "ul" || item->tag == "ol") {
                render_list(*item, depth + 1, lines);
                continue;
            }
            std::string own_text;
            std::vector<const Node*> nested;
            for (const auto& part : item->children) {
                if (!part->is_text && (part->tag == "ul" || part->tag == "ol")) {
                    nested.push_back(part.get());
                } else {
                    own_text += part->is_text ? part->text : html::text_content(*part) + " ";
                }
            }
            std::string text = collapse_whitespace(own_text);
            if (!text.empty()) {
                ++number;
                const std::string marker = ordered ? std::to_string(number) + ". " : std::string("- ");
                lines.push_back(std::string(depth * 2, ' ') + marker + aligned(std::move(text)));
            }
            for (const Node* sub : nested) render_list(*sub, depth + 1, lines);
        }
    }

    const CleanTextMatcher* matcher_;
    std::vector<ParsedBlock> blocks_;
    std::string inline_;
};

std::size_t count_digits(std::size_t n) {
    std::size_t d = 1;
    while (n >= 10) {
        n /= 10;
        ++d;
    }
    return d;
}

} // namespace

std::string_view block_kind_name(BlockKind kind) noexcept {
    switch (kind) {
    case BlockKind::heading: return "heading";
    case BlockKind::paragraph: return "paragraph";
    case BlockKind::list: return "list";
    case BlockKind::table: return "table";
    case BlockKind::code: return "code";
    }
    return "paragraph";
}

std::string Chunk::presented_text() const {
    std::string out;
    for (const std::string* part : {&prelude, &core_text, &postlude}) {
        if (part->empty()) continue;
        if (!out.empty()) out += '\n';
        out += *part;
    }
    return out;
}

void ChunkingPolicy::validate() const {
    if (target_chars == 0) fail(ErrorCode::InvalidArgument, "target_chars must be > 0");
    if (max_chars < target_chars) fail(ErrorCode::InvalidArgument, "max_chars must be >= target_chars");
}

std::string table_to_markdown(std::string_view table_markup) {
    const auto root = html::parse(table_markup);
    const Node* table = root->find_first("table");
    if (table == nullptr) fail(ErrorCode::MalformedTable, "no table element");
    return render_table(*table);
}

std::vector<ParsedBlock> parse_blocks(std::string_view structured_markup) {
    const auto root = html::parse(structured_markup);
    return BlockExtractor(nullptr).run(*root);
}

std::optional<AlignmentMatch> best_clean_match(std::string_view block_text, std::string_view clean_text,
                                               double threshold) {
    return CleanTextMatcher(clean_text, threshold).match(block_text);
}

std::vector<ParsedBlock> align_outputs(const SourceDocument& source, double threshold) {
    const auto root = html::parse(source.structured_markup);
    if (!source.clean_text || trim(*source.clean_text).empty()) return BlockExtractor(nullptr).run(*root);
    const CleanTextMatcher matcher(*source.clean_text, threshold);
    return BlockExtractor(&matcher).run(*root);
}

std::string chunk_id_for(std::string_view doc_id, std::size_t index, std::size_t total) {
    const std::size_t width = std::max<std::size_t>(4, count_digits(total > 0 ? total - 1 : 0));
    std::string digits = std::to_string(index);
    if (digits.size() < width) digits.insert(0, width - digits.size(), '0');
    return std::string(doc_id) + "-" + digits;
}

std::vector<Chunk> chunk_document(std::string_view doc_id, const std::vector<ParsedBlock>& blocks,
                                  const ChunkingPolicy& policy) {
    policy.validate();
    std::vector<std::pair<std::size_t, std::size_t>> ranges; // block index ranges [first, last]
    const std::size_t joiner_len = kBlockJoiner.size();

    std::vector<std::size_t> lens(blocks.size());
    for (std::size_t i = 0; i < blocks.size(); ++i) lens[i] = utf8::length(blocks[i].markdown);
    const auto span_len = [&](std::size_t first, std::size_t last) {
        std::size_t total = 0;
        for (std::size_t b = first; b <= last; ++b) total += lens[b] + (b > first ? joiner_len : 0);
        return total;
    };

    std::size_t start = 0;
    std::size_t current_len = 0;
    bool open = false;
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        const std::size_t len = lens[i];
        if (!open) {
            start = i;
            current_len = len;
            open = true;
        } else if (len > policy.max_chars || current_len + joiner_len + len > policy.target_chars) {
            // Break before the run of headings that introduces block i, if any block precedes it.
            std::size_t cut = i;
            while (cut > start && blocks[cut - 1].kind == BlockKind::heading) --cut;
            if (cut > start) {
                ranges.emplace_back(start, cut - 1);
                start = cut;
                current_len = span_len(cut, i);
            } else {
                current_len += joiner_len + len;
            }
        } else {
            current_len += joiner_len + len;
        }
        // An oversized block closes its chunk, unless it is a heading awaiting its content.
        if (len > policy.max_chars && blocks[i].kind != BlockKind::heading) {
            ranges.emplace_back(start, i);
            open = false;
        }
    }
    if (open) ranges.emplace_back(start, blocks.size() - 1);

    std::vector<Chunk> chunks;
    chunks.reserve(ranges.size());
    for (std::size_t c = 0; c < ranges.size(); ++c) {
        const auto [first, last] = ranges[c];
        Chunk chunk;
        chunk.chunk_id = chunk_id_for(doc_id, c, ranges.size());
        chunk.doc_id = std::string(doc_id);
        for (std::size_t b = first; b <= last; ++b) {
            if (b > first) chunk.core_text += kBlockJoiner;
            chunk.core_text += blocks[b].markdown;
        }
        chunk.first_ordinal = blocks[first].ordinal;
        chunk.last_ordinal = blocks[last].ordinal;
        chunk.char_len = utf8::length(chunk.core_text);
        chunks.push_back(std::move(chunk));
    }
    return chunks;
}

std::string overlap_tail(std::string_view text, std::size_t budget) {
    if (budget == 0 || text.empty()) return {};
    const std::size_t n = utf8::length(text);
    std::size_t begin = n <= budget ? 0 : utf8::offset_of(text, n - budget);
    const auto ws = [](char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; };
    if (begin > 0 && !ws(text[begin - 1])) {
        // Cut landed inside a word: move forward past the next whitespace.
        while (begin < text.size() && !ws(text[begin])) ++begin;
    }
    while (begin < text.size() && ws(text[begin])) ++begin;
    return std::string(text.substr(begin));
}

std::string overlap_head(std::string_view text, std::size_t budget) {
    if (budget == 0 || text.empty()) return {};
    std::size_t end = utf8::offset_of(text, budget);
    const auto ws = [](char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; };
    if (end < text.size() && !ws(text[end])) {
        while (end > 0 && !ws(text[end - 1])) --end;
    }
    while (end > 0 && ws(text[end - 1])) --end;
    return std::string(text.substr(0, end));
}

std::vector<Chunk> attach_overlap(std::vector<Chunk> chunks, const ChunkingPolicy& policy) {
    for (std::size_t i = 0; i < chunks.size(); ++i) {
        chunks[i].prelude = i > 0 ? overlap_tail(chunks[i - 1].core_text, policy.overlap_budget) : std::string();
        chunks[i].postlude =
            i + 1 < chunks.size() ? overlap_head(chunks[i + 1].core_text, policy.overlap_budget) : std::string();
    }
    return chunks;
}

std::vector<Chunk> ingest_document(const SourceDocument& source, const ChunkingPolicy& policy) {
    return attach_overlap(chunk_document(source.doc_id, align_outputs(source), policy), policy);
}

IngestManifest load_ingest_manifest(const std::filesystem::path& manifest_path) {
    const nlohmann::json doc = read_json_file(manifest_path);
    const auto base = manifest_path.parent_path();
    IngestManifest manifest;
    try {
        manifest.corpus_id = doc.value("corpus_id", manifest_path.parent_path().filename().string());
        const auto& docs = doc.at("documents");
        if (!docs.is_object()) fail(ErrorCode::SchemaError, "\"documents\" must map doc_id to file paths");
        for (const auto& [doc_id, entry] : docs.items()) {
            if (doc_id.empty()) fail(ErrorCode::SchemaError, "empty doc_id in manifest");
            SourceDocument source;
            source.doc_id = doc_id;
            const auto markup_path = base / entry.at("markup").get<std::string>();
            source.structured_markup = read_text_file(markup_path);
            if (trim(source.structured_markup).empty()) {
                fail(ErrorCode::SchemaError, "document " + doc_id + " has empty structured markup");
            }
            if (entry.contains("clean_text") && !entry.at("clean_text").is_null()) {
                source.clean_text = read_text_file(base / entry.at("clean_text").get<std::string>());
            }
            source.origin_uri = entry.value("origin_uri", markup_path.string());
            manifest.documents.push_back(std::move(source));
        }
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::SchemaError, manifest_path.string() + ": " + e.what());
    }
    return manifest;
}

std::string chunk_to_json_line(const Chunk& chunk) {
    nlohmann::ordered_json j;
    j["chunk_id"] = chunk.chunk_id;
    j["doc_id"] = chunk.doc_id;
    j["core_text"] = chunk.core_text;
    j["prelude"] = chunk.prelude;
    j["postlude"] = chunk.postlude;
    j["block_range"] = {chunk.first_ordinal, chunk.last_ordinal};
    j["char_len"] = chunk.char_len;
    return j.dump();
}

void write_chunks_jsonl(const std::filesystem::path& path, const std::vector<Chunk>& chunks) {
    std::vector<std::string> lines;
    lines.reserve(chunks.size());
    for (const auto& c : chunks) lines.push_back(chunk_to_json_line(c));
    write_lines(path, lines);
}

std::vector<Chunk> read_chunks_jsonl(const std::filesystem::path& path) {
    std::vector<Chunk> chunks;
    for_each_json_line(path, [&](const nlohmann::json& j, std::size_t) {
        Chunk c;
        c.chunk_id = j.at("chunk_id").get<std::string>();
        c.doc_id = j.at("doc_id").get<std::string>();
        c.core_text = j.at("core_text").get<std::string>();
        c.prelude = j.at("prelude").get<std::string>();
        c.postlude = j.at("postlude").get<std::string>();
        c.first_ordinal = j.at("block_range").at(0).get<std::size_t>();
        c.last_ordinal = j.at("block_range").at(1).get<std::size_t>();
        c.char_len = j.at("char_len").get<std::size_t>();
        chunks.push_back(std::move(c));
    });
    return chunks;
}

} // namespace ragkit

/**
 * @file corpus.cpp
 * @brief BM25 index construction, embedding store and corpus persistence.
 */
#include "ragkit/corpus.hpp"

#include "ragkit/error.hpp"
#include "ragkit/jsonl.hpp"
#include "ragkit/text.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstring>
#include <ctime>
#include <fstream>
#include <set>

namespace ragkit {

namespace {

constexpr char kBm25Magic[8] = {'R', 'K', 'B', 'M', '2', '5', '\0', '\0'};
constexpr std::uint32_t kBm25FormatVersion = 1;

class ByteWriter {
public:
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
    }
    void u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
    }
    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
    void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
    void bytes(std::string_view s) { buf_.append(s); }
    void str(std::string_view s) {
        u32(static_cast<std::uint32_t>(s.size()));
        bytes(s);
    }
    const std::string& data() const noexcept { return buf_; }

private:
    std::string buf_;
};

class ByteReader {
public:
    ByteReader(std::string_view data, std::string source) : data_(data), source_(std::move(source)) {}

    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
        pos_ += 4;
        return v;
    }
    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
        pos_ += 8;
        return v;
    }
    double f64() { return std::bit_cast<double>(u64()); }
    float f32() { return std::bit_cast<float>(u32()); }
    std::string_view bytes(std::size_t n) {
        need(n);
        auto out = data_.substr(pos_, n);
        pos_ += n;
        return out;
    }
    std::string str() { return std::string(bytes(u32())); }
    bool done() const noexcept { return pos_ == data_.size(); }

private:
    void need(std::size_t n) const {
        if (pos_ + n > data_.size()) fail(ErrorCode::IoError, source_ + ": truncated");
    }

    std::string_view data_;
    std::string source_;
    std::size_t pos_ = 0;
};

} // namespace

InvertedIndex InvertedIndex::build(const std::vector<Chunk>& chunks, Bm25Params params) {
    std::vector<std::pair<std::string, std::vector<std::string>>> docs;
    docs.reserve(chunks.size());
    for (const auto& c : chunks) docs.emplace_back(c.chunk_id, analyze(c.core_text));
    return build_from_terms(std::move(docs), params);
}

InvertedIndex InvertedIndex::build_from_terms(std::vector<std::pair<std::string, std::vector<std::string>>> docs,
                                              Bm25Params params) {
    std::sort(docs.begin(), docs.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    for (std::size_t i = 1; i < docs.size(); ++i) {
        if (docs[i].first == docs[i - 1].first) fail(ErrorCode::DuplicateChunkId, docs[i].first);
    }
    InvertedIndex index;
    index.params_ = params;
    std::uint64_t total = 0;
    for (std::size_t d = 0; d < docs.size(); ++d) {
        auto& [chunk_id, terms] = docs[d];
        index.chunk_ids_.push_back(std::move(chunk_id));
        index.doc_len_.push_back(static_cast<std::uint32_t>(terms.size()));
        total += terms.size();
        std::map<std::string_view, std::uint32_t> tf;
        for (const auto& t : terms) ++tf[t];
        for (const auto& [term, count] : tf) {
            auto it = index.postings_.find(term);
            if (it == index.postings_.end()) it = index.postings_.emplace(std::string(term), std::vector<Posting>{}).first;
            it->second.push_back({static_cast<std::uint32_t>(d), count});
        }
    }
    index.avgdl_ = docs.empty() ? 0.0 : static_cast<double>(total) / static_cast<double>(docs.size());
    return index;
}

std::uint32_t InvertedIndex::doc_len(std::string_view chunk_id) const {
    const auto it = std::lower_bound(chunk_ids_.begin(), chunk_ids_.end(), chunk_id);
    if (it == chunk_ids_.end() || *it != chunk_id) fail(ErrorCode::InvalidArgument, "unknown chunk " + std::string(chunk_id));
    return doc_len_[static_cast<std::size_t>(it - chunk_ids_.begin())];
}

std::span<const Posting> InvertedIndex::postings_for(std::string_view term) const {
    const auto it = postings_.find(term);
    if (it == postings_.end()) return {};
    return it->second;
}

double InvertedIndex::idf(std::string_view term) const {
    const double n = static_cast<double>(n_docs());
    const double df = static_cast<double>(this->df(term));
    return std::log(1.0 + (n - df + 0.5) / (df + 0.5));
}

void InvertedIndex::save(const std::filesystem::path& path) const {
    ByteWriter w;
    w.bytes(std::string_view(kBm25Magic, sizeof kBm25Magic));
    w.u32(kBm25FormatVersion);
    w.u32(0);
    w.f64(params_.k1);
    w.f64(params_.b);
    w.u64(chunk_ids_.size());
    w.u64(postings_.size());
    w.f64(avgdl_);
    for (std::size_t d = 0; d < chunk_ids_.size(); ++d) {
        w.str(chunk_ids_[d]);
        w.u32(doc_len_[d]);
    }
    std::uint64_t offset = 0;
    for (const auto& [term, list] : postings_) {
        w.str(term);
        w.u64(offset);
        w.u32(static_cast<std::uint32_t>(list.size()));
        offset += list.size();
    }
    for (const auto& [term, list] : postings_) {
        for (const auto& p : list) {
            w.u32(p.doc);
            w.u32(p.tf);
        }
    }
    write_text_file(path, w.data());
}

InvertedIndex InvertedIndex::load(const std::filesystem::path& path) {
    const std::string data = read_text_file(path);
    ByteReader r(data, path.string());
    if (r.bytes(sizeof kBm25Magic) != std::string_view(kBm25Magic, sizeof kBm25Magic)) {
        fail(ErrorCode::IoError, path.string() + ": not a bm25 index");
    }
    if (const auto version = r.u32(); version != kBm25FormatVersion) {
        fail(ErrorCode::VersionMismatch, path.string() + ": format version " + std::to_string(version));
    }
    r.u32();
    InvertedIndex index;
    index.params_.k1 = r.f64();
    index.params_.b = r.f64();
    const std::uint64_t n_docs = r.u64();
    const std::uint64_t n_terms = r.u64();
    index.avgdl_ = r.f64();
    for (std::uint64_t d = 0; d < n_docs; ++d) {
        index.chunk_ids_.push_back(r.str());
        index.doc_len_.push_back(r.u32());
    }
    std::vector<std::pair<std::string, std::uint32_t>> dict;
    for (std::uint64_t t = 0; t < n_terms; ++t) {
        std::string term = r.str();
        r.u64();
        dict.emplace_back(std::move(term), r.u32());
    }
    for (auto& [term, df] : dict) {
        std::vector<Posting> list(df);
        for (auto& p : list) {
            p.doc = r.u32();
            p.tf = r.u32();
            if (p.doc >= n_docs) fail(ErrorCode::IoError, path.string() + ": posting references unknown document");
        }
        index.postings_.emplace(std::move(term), std::move(list));
    }
    if (!r.done()) fail(ErrorCode::IoError, path.string() + ": trailing bytes");
    return index;
}

double euclidean_norm(std::span<const float> v) noexcept {
    double sum = 0.0;
    for (const float x : v) sum += static_cast<double>(x) * static_cast<double>(x);
    return std::sqrt(sum);
}

void EmbeddingStore::upsert(const std::vector<std::pair<std::string, std::vector<float>>>& pairs) {
    const std::size_t expected = dims_ != 0 ? dims_ : (pairs.empty() ? 0 : pairs.front().second.size());
    for (const auto& [id, v] : pairs) {
        if (v.size() != expected) {
            fail(ErrorCode::DimensionMismatch, id + ": expected " + std::to_string(expected) + " dims, got " + std::to_string(v.size()));
        }
        if (v.empty()) fail(ErrorCode::DimensionMismatch, id + ": empty vector");
        if (euclidean_norm(v) == 0.0) fail(ErrorCode::ZeroVector, id);
    }
    for (const auto& [id, v] : pairs) upsert(id, v);
}

void EmbeddingStore::upsert(const std::string& chunk_id, std::span<const float> v) {
    if (dims_ == 0) dims_ = v.size();
    if (v.size() != dims_ || v.empty()) {
        fail(ErrorCode::DimensionMismatch, chunk_id + ": expected " + std::to_string(dims_) + " dims, got " + std::to_string(v.size()));
    }
    const double n = euclidean_norm(v);
    if (n == 0.0 || !std::isfinite(n)) fail(ErrorCode::ZeroVector, chunk_id);
    if (const auto it = rows_.find(chunk_id); it != rows_.end()) {
        std::copy(v.begin(), v.end(), data_.begin() + static_cast<std::ptrdiff_t>(it->second * dims_));
        norms_[it->second] = n;
        return;
    }
    rows_.emplace(chunk_id, ids_.size());
    ids_.push_back(chunk_id);
    data_.insert(data_.end(), v.begin(), v.end());
    norms_.push_back(n);
}

std::optional<std::size_t> EmbeddingStore::row_of(std::string_view chunk_id) const {
    const auto it = rows_.find(std::string(chunk_id));
    if (it == rows_.end()) return std::nullopt;
    return it->second;
}

void EmbeddingStore::save(const std::filesystem::path& f32_path, const std::filesystem::path& ids_path) const {
    ByteWriter w;
    for (const float x : data_) w.f32(x);
    write_text_file(f32_path, w.data());
    write_lines(ids_path, ids_);
}

EmbeddingStore EmbeddingStore::load(const std::filesystem::path& f32_path, const std::filesystem::path& ids_path,
                                    std::size_t dims) {
    const std::string raw = read_text_file(f32_path);
    const std::string ids_text = read_text_file(ids_path);
    std::vector<std::string> ids;
    std::size_t start = 0;
    while (start < ids_text.size()) {
        std::size_t end = ids_text.find('\n', start);
        if (end == std::string::npos) end = ids_text.size();
        if (end > start) ids.emplace_back(ids_text.substr(start, end - start));
        start = end + 1;
    }
    if (dims == 0 && !ids.empty()) fail(ErrorCode::DimensionMismatch, "zero embedding dims in manifest");
    if (raw.size() != ids.size() * dims * 4) {
        fail(ErrorCode::DimensionMismatch, f32_path.string() + ": size does not match " + std::to_string(ids.size()) +
                                               " x " + std::to_string(dims) + " float32");
    }
    EmbeddingStore store(dims);
    ByteReader r(raw, f32_path.string());
    std::vector<float> row(dims);
    for (const auto& id : ids) {
        for (auto& x : row) x = r.f32();
        store.upsert(id, row);
    }
    return store;
}

bool EmbeddingStore::operator==(const EmbeddingStore& other) const {
    return dims_ == other.dims_ && ids_ == other.ids_ && data_ == other.data_;
}

const Chunk* Corpus::find_chunk(std::string_view chunk_id) const {
    if (lookup_.size() != chunks.size()) {
        for (const auto& c : chunks) {
            if (c.chunk_id == chunk_id) return &c;
        }
        return nullptr;
    }
    const auto it = lookup_.find(std::string(chunk_id));
    return it == lookup_.end() ? nullptr : &chunks[it->second];
}

void Corpus::rebuild_lookup() {
    lookup_.clear();
    for (std::size_t i = 0; i < chunks.size(); ++i) lookup_.emplace(chunks[i].chunk_id, i);
}

std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void save_corpus(const std::filesystem::path& dir, const Corpus& corpus) {
    const auto& m = corpus.manifest;
    if (m.chunk_count != corpus.chunks.size()) {
        fail(ErrorCode::InvalidArgument, "manifest chunk_count does not match stored chunks");
    }
    if (!corpus.embeddings.empty() && m.embedding_dims != corpus.embeddings.dims()) {
        fail(ErrorCode::DimensionMismatch, "manifest embedding_dims does not match stored vectors");
    }
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) fail(ErrorCode::IoError, "cannot create " + dir.string() + ": " + ec.message());

    nlohmann::ordered_json j;
    j["corpus_id"] = m.corpus_id;
    j["chunk_count"] = m.chunk_count;
    j["embedding_model_id"] = m.embedding_model_id;
    j["embedding_dims"] = m.embedding_dims;
    j["analyzer_version"] = m.analyzer_version;
    j["created_at"] = m.created_at;
    write_chunks_jsonl(dir / kChunksFile, corpus.chunks);
    corpus.bm25.save(dir / kBm25File);
    corpus.embeddings.save(dir / kEmbeddingsFile, dir / kEmbeddingIdsFile);
    write_json_file(dir / kManifestFile, j);
}

Corpus load_corpus(const std::filesystem::path& dir, std::string_view expected_analyzer) {
    if (!std::filesystem::is_directory(dir)) fail(ErrorCode::IoError, "corpus directory not found: " + dir.string());
    const auto j = read_json_file(dir / kManifestFile);
    Corpus corpus;
    try {
        corpus.manifest.corpus_id = j.at("corpus_id").get<std::string>();
        corpus.manifest.chunk_count = j.at("chunk_count").get<std::size_t>();
        corpus.manifest.embedding_model_id = j.at("embedding_model_id").get<std::string>();
        corpus.manifest.embedding_dims = j.at("embedding_dims").get<std::size_t>();
        corpus.manifest.analyzer_version = j.at("analyzer_version").get<std::string>();
        corpus.manifest.created_at = j.at("created_at").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::SchemaError, (dir / kManifestFile).string() + ": " + e.what());
    }
    if (corpus.manifest.analyzer_version != expected_analyzer) {
        fail(ErrorCode::VersionMismatch, "corpus analyzer " + corpus.manifest.analyzer_version + " but engine uses " +
                                             std::string(expected_analyzer));
    }
    corpus.chunks = read_chunks_jsonl(dir / kChunksFile);
    if (corpus.chunks.size() != corpus.manifest.chunk_count) {
        fail(ErrorCode::IoError, "chunk_count mismatch in " + dir.string());
    }
    corpus.bm25 = InvertedIndex::load(dir / kBm25File);
    corpus.embeddings = EmbeddingStore::load(dir / kEmbeddingsFile, dir / kEmbeddingIdsFile, corpus.manifest.embedding_dims);
    corpus.rebuild_lookup();
    return corpus;
}

} // namespace ragkit

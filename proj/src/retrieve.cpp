/**
 * @file retrieve.cpp
 * @brief Search implementations and strategy evaluation.
 */
#include "ragkit/retrieve.hpp"

#include "ragkit/error.hpp"
#include "ragkit/jsonl.hpp"
#include "ragkit/text.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <unordered_map>

namespace ragkit {

namespace {

bool better(double score_a, std::string_view id_a, double score_b, std::string_view id_b) {
    if (score_a != score_b) return score_a > score_b;
    return id_a < id_b;
}

HitList finish(std::vector<std::pair<const std::string*, double>>& scored, std::size_t k) {
    const auto cmp = [](const auto& a, const auto& b) { return better(a.second, *a.first, b.second, *b.first); };
    const std::size_t keep = std::min(k, scored.size());
    std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(keep), scored.end(), cmp);
    HitList hits;
    hits.reserve(keep);
    for (std::size_t i = 0; i < keep; ++i) hits.push_back({*scored[i].first, scored[i].second, i + 1});
    return hits;
}

} // namespace

std::string_view strategy_name(StrategyKind kind) noexcept {
    switch (kind) {
    case StrategyKind::semantic: return "semantic";
    case StrategyKind::bm25: return "bm25";
    case StrategyKind::hybrid: return "hybrid";
    }
    return "semantic";
}

StrategyKind parse_strategy(std::string_view name) {
    if (name == "semantic") return StrategyKind::semantic;
    if (name == "bm25") return StrategyKind::bm25;
    if (name == "hybrid") return StrategyKind::hybrid;
    fail(ErrorCode::InvalidArgument, "unknown retrieval strategy '" + std::string(name) + "'");
}

HitList rank_top_k(std::vector<std::pair<std::string, double>> scored, std::size_t k) {
    std::vector<std::pair<const std::string*, double>> refs;
    refs.reserve(scored.size());
    for (const auto& [id, s] : scored) refs.emplace_back(&id, s);
    return finish(refs, k);
}

HitList cosine_top_k(std::span<const float> query, const EmbeddingStore& store, std::size_t k) {
    if (store.empty()) fail(ErrorCode::EmptyStore, "no embeddings stored");
    if (query.size() != store.dims()) {
        fail(ErrorCode::DimensionMismatch, "query has " + std::to_string(query.size()) + " dims, store has " +
                                               std::to_string(store.dims()));
    }
    const double qnorm = euclidean_norm(query);
    if (qnorm == 0.0) fail(ErrorCode::ZeroVector, "query embedding");
    std::vector<std::pair<const std::string*, double>> scored;
    scored.reserve(store.size());
    const auto& ids = store.ids();
    for (std::size_t row = 0; row < store.size(); ++row) {
        const auto v = store.vector(row);
        double dot = 0.0;
        for (std::size_t d = 0; d < v.size(); ++d) dot += static_cast<double>(query[d]) * static_cast<double>(v[d]);
        scored.emplace_back(&ids[row], dot / (qnorm * store.norm(row)));
    }
    return finish(scored, k);
}

HitList bm25_search_terms(const std::vector<std::string>& query_terms, std::size_t k, const InvertedIndex& index) {
    if (index.n_docs() == 0 || query_terms.empty()) return {};
    const double k1 = index.params().k1;
    const double b = index.params().b;
    const double avgdl = index.avgdl();
    const auto& lengths = index.doc_lengths();
    std::vector<double> score(index.n_docs(), 0.0);
    std::vector<bool> touched(index.n_docs(), false);
    for (const auto& term : query_terms) {
        const auto postings = index.postings_for(term);
        if (postings.empty()) continue;
        const double idf = index.idf(term);
        for (const auto& p : postings) {
            const double tf = p.tf;
            const double dl = lengths[p.doc];
            score[p.doc] += idf * (tf * (k1 + 1.0)) / (tf + k1 * (1.0 - b + b * dl / avgdl));
            touched[p.doc] = true;
        }
    }
    std::vector<std::pair<const std::string*, double>> scored;
    for (std::size_t d = 0; d < score.size(); ++d) {
        if (touched[d] && score[d] > 0.0) scored.emplace_back(&index.chunk_ids()[d], score[d]);
    }
    return finish(scored, k);
}

HitList bm25_search(std::string_view query, std::size_t k, const InvertedIndex& index) {
    return bm25_search_terms(analyze(query), k, index);
}

HitList rrf_fuse(const std::vector<HitList>& lists, double rrf_k, std::size_t k) {
    if (!(rrf_k > 0)) fail(ErrorCode::InvalidArgument, "rrf_k must be > 0");
    std::unordered_map<std::string, double> fused;
    std::vector<std::string> order;
    for (const auto& list : lists) {
        for (const auto& hit : list) {
            auto [it, inserted] = fused.emplace(hit.chunk_id, 0.0);
            if (inserted) order.push_back(hit.chunk_id);
            it->second += 1.0 / (rrf_k + static_cast<double>(hit.rank));
        }
    }
    std::vector<std::pair<const std::string*, double>> scored;
    scored.reserve(order.size());
    for (const auto& id : order) scored.emplace_back(&id, fused.at(id));
    return finish(scored, k);
}

nlohmann::ordered_json StrategyReport::to_json() const {
    nlohmann::ordered_json j;
    j["metric"] = metric_name;
    j["k"] = k_eval;
    nlohmann::ordered_json scores = nlohmann::ordered_json::object();
    for (const auto& [kind, value] : per_strategy) scores[std::string(strategy_name(kind))] = value;
    j["scores"] = scores;
    j["chosen"] = std::string(strategy_name(chosen));
    return j;
}

StrategyReport StrategyReport::from_json(const nlohmann::json& j) {
    StrategyReport r;
    try {
        r.metric_name = j.at("metric").get<std::string>();
        r.k_eval = j.at("k").get<std::size_t>();
        for (const auto& [name, value] : j.at("scores").items()) r.per_strategy[parse_strategy(name)] = value.get<double>();
        r.chosen = parse_strategy(j.at("chosen").get<std::string>());
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::SchemaError, std::string("strategy report: ") + e.what());
    }
    return r;
}

void StrategyReport::save(const std::filesystem::path& path) const { write_json_file(path, to_json()); }

StrategyReport StrategyReport::load(const std::filesystem::path& path) { return from_json(read_json_file(path)); }

StrategyKind choose_strategy(const std::map<StrategyKind, double>& scores) {
    StrategyKind best = StrategyKind::semantic;
    double best_score = -1.0;
    for (const StrategyKind kind : {StrategyKind::semantic, StrategyKind::hybrid, StrategyKind::bm25}) {
        const auto it = scores.find(kind);
        if (it == scores.end()) continue;
        if (it->second > best_score) {
            best = kind;
            best_score = it->second;
        }
    }
    return best;
}

Retriever::Retriever(std::shared_ptr<const Corpus> corpus, std::shared_ptr<Embedder> embedder,
                     RetrievalStrategy defaults)
    : corpus_(std::move(corpus)), embedder_(std::move(embedder)), defaults_(defaults) {
    if (!corpus_) fail(ErrorCode::InvalidArgument, "retriever needs a corpus");
}

HitList Retriever::semantic_search(std::string_view query, std::size_t k) const {
    if (corpus_->embeddings.empty()) fail(ErrorCode::EmptyStore, "corpus has no embeddings");
    if (!embedder_) fail(ErrorCode::InvalidArgument, "semantic search needs an embedder");
    const auto vectors = embedder_->embed_batch({std::string(query)});
    if (vectors.size() != 1) fail(ErrorCode::DimsInconsistent, "expected one query embedding");
    return cosine_top_k(vectors.front(), corpus_->embeddings, k);
}

HitList Retriever::bm25_search(std::string_view query, std::size_t k) const {
    return ragkit::bm25_search(query, k, corpus_->bm25);
}

HitList Retriever::hybrid_search(std::string_view query, std::size_t k) const {
    const std::size_t depth = std::max(defaults_.fuse_depth, k);
    return rrf_fuse({semantic_search(query, depth), bm25_search(query, depth)}, defaults_.rrf_k, k);
}

HitList Retriever::search(StrategyKind kind, std::string_view query, std::size_t k) const {
    if (k == 0) fail(ErrorCode::InvalidArgument, "k must be >= 1");
    switch (kind) {
    case StrategyKind::semantic: return semantic_search(query, k);
    case StrategyKind::bm25: return bm25_search(query, k);
    case StrategyKind::hybrid: return hybrid_search(query, k);
    }
    return {};
}

HitList Retriever::retrieve(std::string_view query, std::size_t k) const {
    const auto kind = locked_strategy();
    if (!kind) fail(ErrorCode::NoStrategyChosen, "no retrieval strategy locked");
    return search(*kind, query, k);
}

void Retriever::lock_strategy(StrategyKind kind) { locked_.store(static_cast<int>(kind)); }

std::optional<StrategyKind> Retriever::locked_strategy() const {
    const int v = locked_.load();
    if (v < 0) return std::nullopt;
    return static_cast<StrategyKind>(v);
}

StrategyReport Retriever::evaluate_strategies(const std::vector<ValidationItem>& validation, std::size_t k_eval) const {
    if (validation.empty()) fail(ErrorCode::EmptyValidationSet, "validation set is empty");
    if (k_eval == 0) fail(ErrorCode::InvalidArgument, "k_eval must be >= 1");
    for (const auto& item : validation) {
        if (item.gold_chunk_ids.empty()) fail(ErrorCode::MissingGoldChunks, "validation question without gold chunks: " + item.question);
        for (const auto& id : item.gold_chunk_ids) {
            if (corpus_->find_chunk(id) == nullptr && !corpus_->embeddings.row_of(id)) {
                fail(ErrorCode::UnknownGoldId, id);
            }
        }
    }

    std::vector<std::string> questions;
    questions.reserve(validation.size());
    for (const auto& item : validation) questions.push_back(item.question);
    if (!embedder_) fail(ErrorCode::InvalidArgument, "strategy evaluation needs an embedder");
    const auto query_vectors = embed_in_batches(*embedder_, questions, 64);
    if (query_vectors.size() != questions.size()) fail(ErrorCode::DimsInconsistent, "query embedding count mismatch");

    const std::size_t depth = std::max(defaults_.fuse_depth, k_eval);
    std::map<StrategyKind, double> hits;
    std::map<StrategyKind, double> rr;
    const auto score = [&](StrategyKind kind, const HitList& list, const std::set<std::string>& gold) {
        for (std::size_t i = 0; i < list.size() && i < k_eval; ++i) {
            if (gold.count(list[i].chunk_id) != 0U) {
                hits[kind] += 1.0;
                rr[kind] += 1.0 / static_cast<double>(list[i].rank);
                return;
            }
        }
    };
    for (std::size_t q = 0; q < validation.size(); ++q) {
        const std::set<std::string> gold(validation[q].gold_chunk_ids.begin(), validation[q].gold_chunk_ids.end());
        const HitList sem = cosine_top_k(query_vectors[q], corpus_->embeddings, depth);
        const HitList lex = ragkit::bm25_search(validation[q].question, depth, corpus_->bm25);
        const HitList hyb = rrf_fuse({sem, lex}, defaults_.rrf_k, k_eval);
        score(StrategyKind::semantic, sem, gold);
        score(StrategyKind::bm25, lex, gold);
        score(StrategyKind::hybrid, hyb, gold);
    }

    StrategyReport report;
    report.k_eval = k_eval;
    report.n_questions = validation.size();
    const double n = static_cast<double>(validation.size());
    for (const StrategyKind kind : {StrategyKind::semantic, StrategyKind::bm25, StrategyKind::hybrid}) {
        report.per_strategy[kind] = hits[kind] / n;
        report.mrr[kind] = rr[kind] / n;
    }
    report.chosen = choose_strategy(report.per_strategy);
    return report;
}

} // namespace ragkit

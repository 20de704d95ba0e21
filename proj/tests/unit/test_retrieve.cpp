/**
 * @file test_retrieve.cpp
 * @brief Dense, BM25 and fused search; strategy evaluation and lock-in.
 */
#include "ragkit/retrieve.hpp"

#include "oracles.hpp"
#include "ragkit/jsonl.hpp"
#include "ragkit/text.hpp"
#include "test_support.hpp"

using namespace ragkit;
using test::error_code_of;

namespace {

HitList hits(std::initializer_list<std::pair<const char*, double>> items) {
    HitList out;
    std::size_t rank = 1;
    for (const auto& [id, score] : items) out.push_back({id, score, rank++});
    return out;
}

std::vector<std::string> ids_of(const HitList& list) {
    std::vector<std::string> out;
    for (const auto& h : list) out.push_back(h.chunk_id);
    return out;
}

} // namespace

TEST_CASE("cosine search basics") {
    EmbeddingStore store(3);
    store.upsert("a", std::vector<float>{1, 0, 0});
    store.upsert("b", std::vector<float>{0, 1, 0});
    store.upsert("c", std::vector<float>{1, 1, 0});
    const std::vector<float> q{0, 1, 0};
    const auto result = cosine_top_k(q, store, 3);
    REQUIRE(result.size() == 3);
    CHECK(result[0].chunk_id == "b");
    CHECK(result[0].score == Catch::Approx(1.0));
    CHECK(result[0].rank == 1);
    CHECK(result[2].chunk_id == "a");
    CHECK(result[2].score == 0.0);

    EmbeddingStore single(2);
    single.upsert("only", std::vector<float>{1, 0});
    CHECK(cosine_top_k(std::vector<float>{0, 1}, single, 5)[0].score == 0.0);

    CHECK(error_code_of([] { cosine_top_k(std::vector<float>{1}, EmbeddingStore(1), 1); }) == ErrorCode::EmptyStore);
    CHECK(error_code_of([&] { cosine_top_k(std::vector<float>{1, 0}, store, 1); }) == ErrorCode::DimensionMismatch);
    CHECK(error_code_of([&] { cosine_top_k(std::vector<float>{0, 0, 0}, store, 1); }) == ErrorCode::ZeroVector);
}

TEST_CASE("cosine ties break by ascending chunk id") {
    EmbeddingStore store(2);
    for (const char* id : {"d", "b", "c", "a"}) store.upsert(id, std::vector<float>{1, 0});
    CHECK(ids_of(cosine_top_k(std::vector<float>{2, 0}, store, 4)) == std::vector<std::string>{"a", "b", "c", "d"});
}

TEST_CASE("cosine top-k equals a full-scan oracle") {
    std::mt19937_64 rng(17);
    std::normal_distribution<float> gauss;
    EmbeddingStore store(16);
    std::vector<std::pair<std::string, std::vector<float>>> rows;
    for (int i = 0; i < 2000; ++i) {
        std::vector<float> v(16);
        for (auto& x : v) x = gauss(rng);
        char id[16];
        std::snprintf(id, sizeof id, "v%05d", i);
        rows.emplace_back(id, v);
    }
    store.upsert(rows);
    for (int q = 0; q < 20; ++q) {
        std::vector<float> query(16);
        for (auto& x : query) x = gauss(rng);
        const auto expected = oracle::cosine(rows, query, 10);
        const auto got = cosine_top_k(query, store, 10);
        REQUIRE(got.size() == expected.size());
        for (std::size_t i = 0; i < got.size(); ++i) {
            CHECK(got[i].chunk_id == expected[i].first);
            CHECK(got[i].score == Catch::Approx(expected[i].second).margin(1e-12));
        }
    }
}

TEST_CASE("bm25 closed form on a one-document corpus") {
    const auto index = InvertedIndex::build({test::make_chunk("d", "a a b")});
    const double k1 = 1.2;
    const double idf = std::log(1.0 + 0.5 / 1.5);
    const auto result = bm25_search("a", 5, index);
    REQUIRE(result.size() == 1);
    CHECK(result[0].score == Catch::Approx(idf * 2 * (k1 + 1) / (2 + k1 * 1)).epsilon(1e-12));
    CHECK(bm25_search("zzz", 5, index).empty());
}

TEST_CASE("bm25 matches a brute-force oracle") {
    std::mt19937_64 rng(23);
    for (int corpus = 0; corpus < 5; ++corpus) {
        std::vector<Chunk> chunks;
        std::vector<std::pair<std::string, std::vector<std::string>>> docs;
        for (int d = 0; d < 50; ++d) {
            std::vector<std::string> terms;
            for (std::uint64_t w = 0, n = 1 + rng() % 40; w < n; ++w) terms.push_back("t" + std::to_string(rng() % 200));
            char id[16];
            std::snprintf(id, sizeof id, "c%03d", d);
            chunks.push_back(test::make_chunk(id, join(terms, " ")));
            docs.emplace_back(id, terms);
        }
        const auto index = InvertedIndex::build(chunks);
        for (int q = 0; q < 20; ++q) {
            std::vector<std::string> query;
            for (std::uint64_t w = 0, n = 1 + rng() % 4; w < n; ++w) query.push_back("t" + std::to_string(rng() % 220));
            const auto expected = oracle::bm25(docs, query, 1.2, 0.75, 50);
            const auto got = bm25_search(join(query, " "), 50, index);
            REQUIRE(got.size() == expected.size());
            for (std::size_t i = 0; i < got.size(); ++i) {
                CHECK(got[i].chunk_id == expected[i].first);
                CHECK(std::abs(got[i].score - expected[i].second) <= 1e-9);
            }
        }
    }
}

TEST_CASE("bm25 is monotone in query-term frequency") {
    std::vector<Chunk> chunks{test::make_chunk("a", "x y z"), test::make_chunk("b", "y z w"), test::make_chunk("c", "q r")};
    double previous = 0;
    for (int extra = 0; extra < 5; ++extra) {
        chunks[0].core_text += " x";
        const auto index = InvertedIndex::build(chunks);
        const auto result = bm25_search("x", 1, index);
        REQUIRE(result.size() == 1);
        CHECK(result[0].score >= previous);
        previous = result[0].score;
    }
}

TEST_CASE("rrf spec examples") {
    const auto one = hits({{"c", 9}, {"a", 5}, {"b", 1}});
    CHECK(ids_of(rrf_fuse({one}, 60, 3)) == ids_of(one));

    const auto fused = rrf_fuse({hits({{"A", 2}, {"B", 1}}), hits({{"B", 2}, {"A", 1}})}, 60, 2);
    REQUIRE(fused.size() == 2);
    CHECK(fused[0].chunk_id == "A");
    CHECK(fused[0].score == Catch::Approx(1.0 / 61 + 1.0 / 62).epsilon(1e-15));
    CHECK(fused[1].score == fused[0].score);

    const auto ordered = rrf_fuse({hits({{"A", 2}, {"B", 1}}), hits({{"A", 9}, {"B", 3}})}, 60, 2);
    CHECK(ordered[0].chunk_id == "A");
    CHECK(ordered[0].score == Catch::Approx(2.0 / 61));
    CHECK(ordered[1].score == Catch::Approx(2.0 / 62));
}

TEST_CASE("rrf agrees with direct evaluation and ignores input scores") {
    std::mt19937_64 rng(29);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<HitList> lists;
        std::vector<std::vector<std::string>> raw;
        for (std::uint64_t l = 0, n = 1 + rng() % 4; l < n; ++l) {
            std::vector<std::string> ids;
            for (int d = 0; d < 15; ++d) ids.push_back("d" + std::to_string(d));
            std::shuffle(ids.begin(), ids.end(), rng);
            ids.resize(rng() % 15);
            HitList list;
            for (std::size_t i = 0; i < ids.size(); ++i) list.push_back({ids[i], 100.0 - static_cast<double>(i), i + 1});
            lists.push_back(list);
            raw.push_back(ids);
        }
        const auto expected = oracle::rrf(raw, 60, 10);
        const auto got = rrf_fuse(lists, 60, 10);
        REQUIRE(got.size() == expected.size());
        for (std::size_t i = 0; i < got.size(); ++i) {
            CHECK(got[i].chunk_id == expected[i].first);
            CHECK(got[i].score == Catch::Approx(expected[i].second).epsilon(1e-15));
        }
        for (auto& list : lists) {
            const double scale = 0.001 + static_cast<double>(rng() % 1000);
            for (auto& h : list) h.score = h.score * scale - 7;
        }
        CHECK(ids_of(rrf_fuse(lists, 60, 10)) == ids_of(got));
    }
}

TEST_CASE("strategy names and argmax tie rule") {
    CHECK(parse_strategy("hybrid") == StrategyKind::hybrid);
    CHECK(error_code_of([] { parse_strategy("dense"); }) == ErrorCode::InvalidArgument);
    using K = StrategyKind;
    CHECK(choose_strategy({{K::semantic, 0.5}, {K::bm25, 0.5}, {K::hybrid, 0.5}}) == K::semantic);
    CHECK(choose_strategy({{K::semantic, 0.4}, {K::bm25, 0.5}, {K::hybrid, 0.5}}) == K::hybrid);
    CHECK(choose_strategy({{K::semantic, 0.4}, {K::bm25, 0.6}, {K::hybrid, 0.5}}) == K::bm25);
}

TEST_CASE("constructed fixtures make each strategy win") {
    for (const auto& fixture : {oracle::semantic_fixture(), oracle::bm25_fixture(), oracle::hybrid_fixture()}) {
        const Retriever retriever(fixture.corpus, fixture.embedder);
        const auto report = retriever.evaluate_strategies(fixture.validation, fixture.k_eval);
        INFO("expected " << strategy_name(fixture.expected));
        CHECK(report.chosen == fixture.expected);
        double best = 0;
        for (const auto& [kind, score] : report.per_strategy) best = std::max(best, score);
        CHECK(report.per_strategy.at(report.chosen) == best);
    }
    const auto hybrid = oracle::hybrid_fixture();
    const auto report = Retriever(hybrid.corpus, hybrid.embedder).evaluate_strategies(hybrid.validation, 1);
    CHECK(report.per_strategy.at(StrategyKind::semantic) == 0.5);
    CHECK(report.per_strategy.at(StrategyKind::bm25) == 0.5);
    CHECK(report.per_strategy.at(StrategyKind::hybrid) == 1.0);
    CHECK(report.per_strategy.size() == 3);
    const auto semantic = oracle::semantic_fixture();
    CHECK(Retriever(semantic.corpus, semantic.embedder).evaluate_strategies(semantic.validation, 1).per_strategy.at(
              StrategyKind::semantic) == 1.0);
}

TEST_CASE("strategy evaluation errors") {
    const auto f = oracle::hybrid_fixture();
    const Retriever retriever(f.corpus, f.embedder);
    CHECK(error_code_of([&] { retriever.evaluate_strategies({}, 1); }) == ErrorCode::EmptyValidationSet);
    CHECK(error_code_of([&] { retriever.evaluate_strategies({{"alpha", {"nope"}}}, 1); }) == ErrorCode::UnknownGoldId);
}

TEST_CASE("k=1 hit rate equals the fraction with gold at rank 1 and MRR is reported") {
    const auto f = oracle::hybrid_fixture();
    const Retriever retriever(f.corpus, f.embedder);
    // Semantic ranks for the golds: g1 first for "alpha", g2 second for "delta".
    const auto report = retriever.evaluate_strategies(f.validation, 2);
    CHECK(report.per_strategy.at(StrategyKind::semantic) == 1.0);
    CHECK(report.mrr.at(StrategyKind::semantic) == Catch::Approx((1.0 + 0.5) / 2));
}

TEST_CASE("retrieve dispatches to the locked strategy") {
    auto corpus = test::make_corpus({{"a-0000", "red apples and green pears"},
                                     {"b-0000", "fast red cars"},
                                     {"c-0000", "green tea leaves"},
                                     {"d-0000", "pears grow on trees"}});
    auto model = std::make_shared<testing::MockModel>();
    Retriever retriever(corpus, model);
    CHECK_FALSE(retriever.locked_strategy());
    CHECK(error_code_of([&] { retriever.retrieve("red", 2); }) == ErrorCode::NoStrategyChosen);

    retriever.lock_strategy(StrategyKind::semantic);
    CHECK(retriever.retrieve("green pears", 3) == retriever.semantic_search("green pears", 3));
    retriever.lock_strategy(StrategyKind::bm25);
    CHECK(retriever.retrieve("green pears", 3) == retriever.bm25_search("green pears", 3));
    retriever.lock_strategy(StrategyKind::hybrid);
    const auto expected = rrf_fuse({retriever.semantic_search("green pears", 50), retriever.bm25_search("green pears", 50)}, 60, 2);
    CHECK(retriever.retrieve("green pears", 2) == expected);
    CHECK(retriever.locked_strategy() == StrategyKind::hybrid);
}

TEST_CASE("strategy report json shape") {
    StrategyReport report;
    report.k_eval = 5;
    report.per_strategy = {{StrategyKind::semantic, 0.8}, {StrategyKind::bm25, 0.6}, {StrategyKind::hybrid, 0.7}};
    report.chosen = StrategyKind::semantic;
    CHECK(report.to_json().dump() ==
          R"({"metric":"hit_rate","k":5,"scores":{"semantic":0.8,"bm25":0.6,"hybrid":0.7},"chosen":"semantic"})");
    test::TempDir dir;
    report.save(dir / "strategy.json");
    const auto loaded = StrategyReport::load(dir / "strategy.json");
    CHECK(loaded.chosen == StrategyKind::semantic);
    CHECK(loaded.per_strategy == report.per_strategy);
}

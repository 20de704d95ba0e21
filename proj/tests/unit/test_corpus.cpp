/**
 * @file test_corpus.cpp
 * @brief BM25 index construction, the embedding store and corpus persistence.
 */
#include "ragkit/corpus.hpp"

#include "ragkit/jsonl.hpp"
#include "ragkit/text.hpp"
#include "test_support.hpp"

#include <fstream>

using namespace ragkit;
using test::error_code_of;

TEST_CASE("empty index") {
    const auto index = InvertedIndex::build({});
    CHECK(index.n_docs() == 0);
    CHECK(index.postings().empty());
    CHECK(index.avgdl() == 0.0);
}

TEST_CASE("two-chunk index matches the hand count") {
    const auto index = InvertedIndex::build({test::make_chunk("c1", "a b"), test::make_chunk("c2", "b c")});
    const auto& ids = index.chunk_ids();
    REQUIRE(ids == std::vector<std::string>{"c1", "c2"});
    const auto postings = [&](const std::string& term) {
        std::vector<std::pair<std::string, std::uint32_t>> out;
        for (const auto& p : index.postings_for(term)) out.emplace_back(ids[p.doc], p.tf);
        return out;
    };
    using P = std::vector<std::pair<std::string, std::uint32_t>>;
    CHECK(postings("a") == P{{"c1", 1}});
    CHECK(postings("b") == P{{"c1", 1}, {"c2", 1}});
    CHECK(postings("c") == P{{"c2", 1}});
    CHECK(index.avgdl() == 2.0);
    CHECK(index.df("b") == 2);
    CHECK(index.df("zzz") == 0);
    CHECK(index.idf("a") == Catch::Approx(std::log(1.0 + 1.5 / 1.5)));
}

TEST_CASE("duplicate chunk ids are rejected") {
    CHECK(error_code_of([] {
              InvertedIndex::build({test::make_chunk("c1", "a"), test::make_chunk("c1", "b")});
          }) == ErrorCode::DuplicateChunkId);
}

TEST_CASE("term frequencies of a chunk sum to its length") {
    std::mt19937_64 rng(3);
    std::vector<Chunk> chunks;
    for (int i = 0; i < 40; ++i) {
        std::string text;
        for (std::uint64_t w = 0, n = rng() % 30; w < n; ++w) text += "w" + std::to_string(rng() % 25) + " ";
        chunks.push_back(test::make_chunk("c" + std::to_string(i), text));
    }
    const auto index = InvertedIndex::build(chunks);
    std::vector<std::uint64_t> sums(index.n_docs(), 0);
    for (const auto& [term, postings] : index.postings()) {
        for (std::size_t i = 1; i < postings.size(); ++i) CHECK(postings[i - 1].doc < postings[i].doc);
        for (const auto& p : postings) sums[p.doc] += p.tf;
    }
    double total = 0;
    for (std::size_t d = 0; d < index.n_docs(); ++d) {
        CHECK(sums[d] == index.doc_lengths()[d]);
        total += index.doc_lengths()[d];
    }
    CHECK(index.avgdl() == Catch::Approx(total / 40.0));
}

TEST_CASE("embedding store upsert semantics") {
    EmbeddingStore store(2);
    store.upsert("a", std::vector<float>{3, 4});
    CHECK(store.norm(*store.row_of("a")) == 5.0);
    store.upsert("a", std::vector<float>{0, 2});
    REQUIRE(store.size() == 1);
    CHECK(store.vector(0)[1] == 2.0f);
    CHECK(store.norm(0) == 2.0);
    CHECK(error_code_of([&] { store.upsert("b", std::vector<float>{1, 2, 3}); }) == ErrorCode::DimensionMismatch);
    CHECK(error_code_of([&] { store.upsert("b", std::vector<float>{0, 0}); }) == ErrorCode::ZeroVector);

    // A batch with one bad vector inserts nothing.
    const std::vector<std::pair<std::string, std::vector<float>>> batch{{"x", {1, 1}}, {"y", {1, 1, 1}}};
    CHECK(error_code_of([&] { store.upsert(batch); }) == ErrorCode::DimensionMismatch);
    CHECK(store.size() == 1);
    CHECK_FALSE(store.row_of("x"));
}

TEST_CASE("corpus save/load round trip") {
    test::TempDir dir;
    std::vector<std::pair<std::string, std::string>> docs;
    std::mt19937_64 rng(5);
    for (int i = 0; i < 100; ++i) {
        std::string text = "chunk " + std::to_string(i) + " é";
        for (std::uint64_t w = 0, n = 1 + rng() % 20; w < n; ++w) text += " t" + std::to_string(rng() % 50);
        char id[16];
        std::snprintf(id, sizeof id, "doc-%04d", i);
        docs.emplace_back(id, text);
    }
    const auto corpus = test::make_corpus(docs, 16);
    corpus->chunks[3].prelude = "before";
    corpus->chunks[3].postlude = "after";
    save_corpus(dir.path(), *corpus);
    const auto loaded = load_corpus(dir.path());
    CHECK(loaded.manifest == corpus->manifest);
    CHECK(loaded.chunks == corpus->chunks);
    CHECK(loaded.bm25 == corpus->bm25);
    CHECK(loaded.embeddings == corpus->embeddings);
    REQUIRE(loaded.find_chunk("doc-0042") != nullptr);
    CHECK(loaded.find_chunk("doc-0042")->core_text == docs[42].second);
    CHECK(loaded.find_chunk("nope") == nullptr);

    const auto ids = read_text_file(dir / "embeddings.ids");
    CHECK(ids.rfind("doc-0000\ndoc-0001\n", 0) == 0);
    CHECK(std::filesystem::file_size(dir / "embeddings.f32") == 100 * 16 * sizeof(float));
    const auto bin = read_text_file(dir / "bm25.bin");
    CHECK(bin.substr(0, 6) == "RKBM25");
}

TEST_CASE("corpus load errors") {
    test::TempDir dir;
    CHECK(error_code_of([&] { load_corpus(dir / "missing"); }) == ErrorCode::IoError);
    const auto corpus = test::make_corpus({{"a-0000", "alpha"}, {"b-0000", "beta"}}, 8);
    save_corpus(dir.path(), *corpus);
    CHECK(error_code_of([&] { load_corpus(dir.path(), "other-analyzer-v9"); }) == ErrorCode::VersionMismatch);
}

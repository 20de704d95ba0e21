/**
 * @file acceptance.cpp
 * @brief Acceptance checks: one PASS/FAIL line per criterion, exit status 1 if any fails.
 */
#include "oracles.hpp"
#include "workspace.hpp"

#include "ragkit/cli.hpp"
#include "ragkit/config.hpp"
#include "ragkit/datagen.hpp"
#include "ragkit/gateway.hpp"
#include "ragkit/ingest.hpp"
#include "ragkit/jsonl.hpp"
#include "ragkit/pipeline.hpp"
#include "ragkit/prompts.hpp"
#include "ragkit/service.hpp"
#include "ragkit/testing/mock_endpoint.hpp"
#include "ragkit/text.hpp"

#include <httplib.h>

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <unistd.h>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace ragkit;

namespace {

/// Result of one criterion; `failures` lists the first few violated checks.
struct Outcome {
    std::size_t checks = 0;
    std::vector<std::string> failures;
    std::string detail;

    void expect(bool ok, const std::string& what) {
        ++checks;
        if (!ok && failures.size() < 5) failures.push_back(what);
        if (!ok && failures.size() == 5) failures.push_back("...");
    }
    bool passed() const { return failures.empty(); }
};

class ScratchDir {
public:
    explicit ScratchDir(const std::string& tag) {
        static int counter = 0;
        path_ = fs::temp_directory_path() /
                ("ragkit-accept-" + std::to_string(::getpid()) + "-" + tag + "-" + std::to_string(counter++));
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~ScratchDir() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    const fs::path& path() const { return path_; }

private:
    fs::path path_;
};

std::string format_seconds(double s) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f s", s);
    return buf;
}

std::string padded_id(const char* prefix, std::size_t i, int width) {
    std::string digits = std::to_string(i);
    if (static_cast<int>(digits.size()) < width) digits.insert(0, static_cast<std::size_t>(width) - digits.size(), '0');
    return prefix + digits;
}

Chunk plain_chunk(const std::string& id, const std::string& text) {
    Chunk c;
    c.chunk_id = id;
    c.doc_id = id;
    c.core_text = text;
    c.char_len = utf8::length(text);
    return c;
}

Logger quiet_logger() {
    return Logger([](LogLevel, std::string_view) {});
}

// ---------------------------------------------------------------- retrieval

Outcome check_bm25() {
    Outcome o;
    std::mt19937_64 rng(20240601);
    double worst = 0;
    for (int corpus = 0; corpus < 25; ++corpus) {
        std::vector<Chunk> chunks;
        std::vector<std::pair<std::string, std::vector<std::string>>> docs;
        for (std::size_t d = 0; d < 50; ++d) {
            std::vector<std::string> terms;
            for (std::uint64_t w = 0, n = 1 + rng() % 60; w < n; ++w) terms.push_back("w" + std::to_string(rng() % 200));
            const auto id = padded_id("d", d, 3);
            chunks.push_back(plain_chunk(id, join(terms, " ")));
            docs.emplace_back(id, terms);
        }
        const auto index = InvertedIndex::build(chunks);
        for (int q = 0; q < 40; ++q) {
            std::vector<std::string> query;
            for (std::uint64_t w = 0, n = 1 + rng() % 5; w < n; ++w) query.push_back("w" + std::to_string(rng() % 200));
            const auto expected = oracle::bm25(docs, query, 1.2, 0.75, 50);
            const auto got = bm25_search(join(query, " "), 50, index);
            o.expect(got.size() == expected.size(), "result size differs on corpus " + std::to_string(corpus));
            for (std::size_t i = 0; i < std::min(got.size(), expected.size()); ++i) {
                o.expect(got[i].chunk_id == expected[i].first, "ranking differs on corpus " + std::to_string(corpus));
                const double diff = std::abs(got[i].score - expected[i].second);
                worst = std::max(worst, diff);
                o.expect(diff <= 1e-9, "score off by " + std::to_string(diff));
            }
        }
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "1000 queries, max |diff| %.1e", worst);
    o.detail = buf;
    return o;
}

Outcome check_dense() {
    Outcome o;
    constexpr std::size_t kRows = 10000;
    constexpr std::size_t kDims = 64;
    std::mt19937_64 rng(77);
    std::normal_distribution<float> gauss;
    std::vector<std::pair<std::string, std::vector<float>>> rows;
    rows.reserve(kRows);
    for (std::size_t i = 0; i < kRows; ++i) {
        std::vector<float> v(kDims);
        for (auto& x : v) x = gauss(rng);
        rows.emplace_back(padded_id("v", i, 5), std::move(v));
    }
    EmbeddingStore store(kDims);
    store.upsert(rows);
    for (int q = 0; q < 100; ++q) {
        std::vector<float> query(kDims);
        for (auto& x : query) x = gauss(rng);
        const auto expected = oracle::cosine(rows, query, 20);
        for (const std::size_t k : {1, 5, 20}) {
            const auto got = cosine_top_k(query, store, k);
            o.expect(got.size() == k, "wrong result size");
            for (std::size_t i = 0; i < std::min(got.size(), k); ++i) {
                o.expect(got[i].chunk_id == expected[i].first, "top-" + std::to_string(k) + " differs at rank " + std::to_string(i + 1));
                o.expect(std::abs(got[i].score - expected[i].second) <= 1e-9, "cosine score differs");
                o.expect(got[i].rank == i + 1, "rank field wrong");
            }
        }
    }
    o.detail = "100 queries x k in {1,5,20} over 10000 x 64";
    return o;
}

Outcome check_rrf() {
    Outcome o;
    std::mt19937_64 rng(4242);
    for (int fixture = 0; fixture < 1000; ++fixture) {
        std::vector<std::vector<std::string>> raw;
        std::vector<HitList> lists;
        const std::size_t n_lists = 1 + rng() % 4;
        for (std::size_t l = 0; l < n_lists; ++l) {
            std::vector<std::string> ids;
            for (int d = 0; d < 40; ++d) ids.push_back(padded_id("c", static_cast<std::size_t>(d), 2));
            std::shuffle(ids.begin(), ids.end(), rng);
            ids.resize(rng() % 41);
            HitList list;
            double score = 10.0 + static_cast<double>(rng() % 100);
            for (std::size_t i = 0; i < ids.size(); ++i) {
                score -= 0.01 + static_cast<double>(rng() % 100) / 50.0;
                list.push_back({ids[i], score, i + 1});
            }
            raw.push_back(ids);
            lists.push_back(std::move(list));
        }
        const double rrf_k = fixture % 2 == 0 ? 60.0 : 1.0 + static_cast<double>(rng() % 100);
        const std::size_t k = 1 + rng() % 30;
        const auto expected = oracle::rrf(raw, rrf_k, k);
        const auto got = rrf_fuse(lists, rrf_k, k);
        o.expect(got.size() == expected.size(), "fused size differs");
        for (std::size_t i = 0; i < std::min(got.size(), expected.size()); ++i) {
            o.expect(got[i].chunk_id == expected[i].first, "fused order differs in fixture " + std::to_string(fixture));
            o.expect(std::abs(got[i].score - expected[i].second) <= 1e-12, "fused score differs");
        }
        // Rescaling input scores by any increasing affine map leaves the fusion unchanged.
        auto rescaled = lists;
        for (auto& list : rescaled) {
            const double a = 1e-3 + static_cast<double>(rng() % 10000) / 7.0;
            const double b = static_cast<double>(rng() % 2001) - 1000.0;
            for (auto& h : list) h.score = a * h.score + b;
        }
        o.expect(rrf_fuse(rescaled, rrf_k, k) == got, "rescaling changed the fusion in fixture " + std::to_string(fixture));
    }
    o.detail = "1000 fixtures + rescaling invariance";
    return o;
}

Outcome check_strategy() {
    Outcome o;
    for (const auto& fixture : {oracle::semantic_fixture(), oracle::bm25_fixture(), oracle::hybrid_fixture()}) {
        const Retriever retriever(fixture.corpus, fixture.embedder);
        const auto report = retriever.evaluate_strategies(fixture.validation, fixture.k_eval);
        o.expect(report.chosen == fixture.expected,
                 "expected " + std::string(strategy_name(fixture.expected)) + ", chose " + std::string(strategy_name(report.chosen)));
    }
    const auto hybrid = oracle::hybrid_fixture();
    const auto hybrid_report = Retriever(hybrid.corpus, hybrid.embedder).evaluate_strategies(hybrid.validation, 1);
    o.expect(hybrid_report.per_strategy.at(StrategyKind::semantic) == 0.5 &&
                 hybrid_report.per_strategy.at(StrategyKind::bm25) == 0.5 &&
                 hybrid_report.per_strategy.at(StrategyKind::hybrid) == 1.0,
             "hybrid fixture scores are not (0.5, 0.5, 1.0)");

    // No validation set: the pipeline locks semantic and persists the choice.
    ScratchDir dir("strategy");
    auto config_json = test::mock_config("http://127.0.0.1:9", dir.path() / "unused-manifest.json");
    const auto config = parse_config(config_json, dir.path());
    auto corpus = oracle::strategy_corpus();
    corpus->manifest.corpus_id = "strategy";
    corpus->manifest.chunk_count = corpus->chunks.size();
    corpus->manifest.embedding_model_id = "table";
    corpus->manifest.embedding_dims = 4;
    corpus->manifest.created_at = "2026-01-01T00:00:00Z";
    save_corpus(config.corpus_dir(), *corpus);
    auto model = std::make_shared<testing::MockModel>();
    const ModelClients models{model, model, model};
    const Logger log = quiet_logger();
    const auto report = run_choose_strategy(StageContext{config, models, log});
    o.expect(report.chosen == StrategyKind::semantic, "no-validation run did not choose semantic");
    o.expect(StrategyReport::load(config.corpus_dir() / kStrategyFile).chosen == StrategyKind::semantic,
             "strategy.json does not record semantic");
    const auto retriever = make_retriever(config, load_workspace_corpus(config), model);
    o.expect(retriever->locked_strategy() == StrategyKind::semantic, "retriever not locked to semantic");
    o.detail = "semantic, bm25, hybrid fixtures + no-validation lock";
    return o;
}

// ---------------------------------------------------------------- datagen

RankFn ranking_over(std::vector<std::string> ids) {
    return [ids = std::move(ids)](std::string_view, std::size_t k) {
        HitList out;
        for (std::size_t i = 0; i < ids.size() && i < k; ++i) out.push_back({ids[i], 1.0 / static_cast<double>(i + 1), i + 1});
        return out;
    };
}

Outcome check_datagen() {
    Outcome o;
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 10000; ++trial) {
        const std::size_t size = 2 + rng() % 30;
        std::vector<std::string> ids;
        for (std::size_t i = 0; i < size; ++i) ids.push_back(padded_id("c", i, 2));
        auto ranked = ids;
        std::shuffle(ranked.begin(), ranked.end(), rng);
        const auto rank = ranking_over(ranked);

        // Hard negatives come from the top-pool_k and never equal the positive.
        const std::string positive = ids[rng() % size];
        const std::size_t pool_k = 1 + rng() % 20;
        const std::uint64_t seed = rng();
        const auto negative = mine_hard_negative("q", positive, rank, size, pool_k, seed);
        o.expect(negative != positive, "hard negative equals the positive");
        std::vector<std::string> pool;
        for (const auto& id : ranked) {
            if (id != positive && pool.size() < pool_k) pool.push_back(id);
        }
        o.expect(std::find(pool.begin(), pool.end(), negative) != pool.end(), "hard negative outside the pool");
        o.expect(mine_hard_negative("q", positive, rank, size, pool_k, seed) == negative, "mining not reproducible");

        // Batches partition the examples and never repeat a positive.
        std::vector<EmbedFTExample> examples;
        for (std::uint64_t i = 0, n = rng() % 40; i < n; ++i) examples.push_back({"q" + std::to_string(i), ids[rng() % size], negative});
        const std::size_t batch_size = 2 + rng() % 16;
        const auto batches = build_batches(examples, batch_size, rng());
        std::vector<int> used(examples.size(), 0);
        for (const auto& b : batches) {
            o.expect(b.size() >= 1 && b.size() <= batch_size, "batch size out of range");
            std::set<std::string> positives;
            for (std::size_t i = 0; i < b.size(); ++i) {
                o.expect(positives.insert(b.examples[i].positive_chunk_id).second, "positive repeated in a batch");
                ++used[b.indices[i]];
            }
        }
        o.expect(std::all_of(used.begin(), used.end(), [](int u) { return u == 1; }), "batches do not partition the examples");

        // Expanded contexts: N distinct ids containing the source chunk once.
        const std::size_t n = 1 + rng() % size;
        const auto triplet = build_expanded_triplet({positive, "q", "a"}, rank, ids, n, rng());
        const std::set<std::string> distinct(triplet.context_chunk_ids.begin(), triplet.context_chunk_ids.end());
        o.expect(triplet.context_chunk_ids.size() == n && distinct.size() == n, "expanded context size wrong");
        o.expect(std::count(triplet.context_chunk_ids.begin(), triplet.context_chunk_ids.end(), positive) == 1,
                 "source chunk not present exactly once");
        o.expect(triplet.context_chunk_ids[triplet.original_position] == positive, "original_position wrong");
    }
    o.detail = "10000 trials";
    return o;
}

// ---------------------------------------------------------------- chunking

std::string random_words(std::mt19937_64& rng, std::size_t n) {
    static const std::vector<std::string> words{"river", "harbor", "ledger", "revenue", "quarter", "basalt", "signal",
                                                "orchard", "cargo",  "meridian", "lantern", "copper",  "tariff", "glacier",
                                                "sales",  "margin", "Zürich",   "naïve",   "fjord",   "2023",   "3M's"};
    std::string out;
    for (std::size_t i = 0; i < n; ++i) {
        if (i > 0) out += ' ';
        out += words[rng() % words.size()];
    }
    return out;
}

SourceDocument synthetic_document(std::mt19937_64& rng, std::size_t index) {
    SourceDocument doc;
    doc.doc_id = padded_id("synth", index, 2);
    std::string html = "<html><body>";
    std::string clean;
    for (std::uint64_t s = 0, sections = 1 + rng() % 6; s < sections; ++s) {
        const auto title = random_words(rng, 2 + rng() % 3);
        html += "<h" + std::to_string(1 + rng() % 3) + ">" + title + "</h1>";
        clean += title + "\n";
        for (std::uint64_t b = 0, blocks = 1 + rng() % 5; b < blocks; ++b) {
            switch (rng() % 4) {
            case 0:
            case 1: {
                const auto text = random_words(rng, 5 + rng() % 120) + ".";
                // Corrupt one character in the markup copy; the clean text keeps the original.
                auto noisy = text;
                if (noisy.size() > 8 && rng() % 2 == 0) noisy[noisy.size() / 2] = 'x';
                html += "<p>" + noisy + "</p>";
                clean += text + "\n";
                break;
            }
            case 2: {
                html += "<ul>";
                for (std::uint64_t i = 0, n = 1 + rng() % 4; i < n; ++i) html += "<li>" + random_words(rng, 3 + rng() % 8) + "</li>";
                html += "</ul>";
                break;
            }
            default: {
                html += "<table><tr><th>key</th><th>value | note</th></tr>";
                for (std::uint64_t r = 0, rows = rng() % 5; r < rows; ++r) {
                    html += "<tr><td>" + random_words(rng, 1) + "</td>";
                    if (rng() % 3 != 0) html += "<td>" + random_words(rng, 2) + "</td>";
                    html += "</tr>";
                }
                html += "</table>";
            }
            }
        }
    }
    html += "</body></html>";
    doc.structured_markup = html;
    if (index % 2 == 0) doc.clean_text = clean;
    return doc;
}

Outcome check_chunking() {
    Outcome o;
    std::mt19937_64 rng(314);
    const ChunkingPolicy policy{400, 900, 60};
    std::size_t total_chunks = 0;
    for (std::size_t d = 0; d < 30; ++d) {
        const auto source = synthetic_document(rng, d);
        const auto blocks = align_outputs(source);
        const auto chunks = ingest_document(source, policy);
        total_chunks += chunks.size();
        const std::string tag = source.doc_id + ": ";
        o.expect(!chunks.empty(), tag + "no chunks");
        o.expect(ingest_document(source, policy) == chunks, tag + "not deterministic");

        std::vector<std::string> block_texts;
        for (const auto& b : blocks) block_texts.push_back(b.markdown);
        std::vector<std::string> cores;
        for (const auto& c : chunks) cores.push_back(c.core_text);
        o.expect(join(cores, kBlockJoiner) == join(block_texts, kBlockJoiner), tag + "chunks do not cover the blocks");

        for (std::size_t i = 0; i < chunks.size(); ++i) {
            const auto& c = chunks[i];
            o.expect(c.chunk_id == chunk_id_for(source.doc_id, i, chunks.size()), tag + "chunk id");
            o.expect(c.char_len == utf8::length(c.core_text), tag + "char_len");
            o.expect(c.first_ordinal <= c.last_ordinal, tag + "ordinal order");
            o.expect(c.first_ordinal == (i == 0 ? 0 : chunks[i - 1].last_ordinal + 1), tag + "chunks not contiguous");
            o.expect(c.char_len <= policy.max_chars || c.first_ordinal == c.last_ordinal ||
                         (c.first_ordinal + 1 == c.last_ordinal && blocks[c.first_ordinal].kind == BlockKind::heading),
                     tag + "oversized multi-block chunk");
            o.expect(i + 1 == chunks.size() || blocks[c.last_ordinal].kind != BlockKind::heading, tag + "chunk ends on a heading");
            o.expect(utf8::length(c.prelude) <= policy.overlap_budget && utf8::length(c.postlude) <= policy.overlap_budget,
                     tag + "overlap over budget");
            if (i == 0) {
                o.expect(c.prelude.empty(), tag + "first prelude not empty");
            } else {
                const auto& prev = chunks[i - 1].core_text;
                o.expect(prev.ends_with(c.prelude), tag + "prelude is not a suffix of the previous chunk");
            }
            if (i + 1 == chunks.size()) {
                o.expect(c.postlude.empty(), tag + "last postlude not empty");
                o.expect(c.last_ordinal + 1 == blocks.size(), tag + "last chunk does not reach the end");
            } else {
                o.expect(chunks[i + 1].core_text.starts_with(c.postlude), tag + "postlude is not a prefix of the next chunk");
            }
        }
    }

    const fs::path tables = fs::path(RAGKIT_TEST_DATA_DIR) / "golden" / "tables";
    std::size_t goldens = 0;
    for (int i = 1; i <= 12; ++i) {
        const auto stem = padded_id("", static_cast<std::size_t>(i), 2);
        const auto html = read_text_file(tables / (stem + ".html"));
        auto expected = read_text_file(tables / (stem + ".md"));
        while (!expected.empty() && expected.back() == '\n') expected.pop_back();
        const bool same = table_to_markdown(html) == expected;
        o.expect(same, "table golden " + stem + " differs");
        goldens += same ? 1 : 0;
    }
    o.detail = "30 documents, " + std::to_string(total_chunks) + " chunks; " + std::to_string(goldens) + "/12 table goldens";
    return o;
}

// ---------------------------------------------------------------- judge

Outcome check_judge() {
    Outcome o;
    const fs::path golden = fs::path(RAGKIT_TEST_DATA_DIR) / "golden";
    o.expect(prompts::judge().text == read_text_file(golden / "judge_template.txt"), "judge template differs from golden");
    const auto prompt = render_judge_prompt("Q?", "A", "A2");
    o.expect(prompt == read_text_file(golden / "judge_prompt_Q_A_A2.txt"), "rendered judge prompt differs from golden");
    o.expect(prompt.starts_with("You are an expert evaluator. Your task is to determine whether the [Generated Answer] is "
                                "factually accurate"),
             "prompt prefix");
    o.expect(prompt.ends_with("\"FALSE\" if it is inaccurate."), "prompt suffix");

    const auto verdict_for = [](std::string reply) {
        testing::ScriptedChat model([reply](const ChatRequest&) { return reply; });
        return judge("Q?", "A", "A2", model);
    };
    o.expect(verdict_for("TRUE").verdict == Verdict::True, "\"TRUE\" is not true");
    o.expect(verdict_for(" false\n").verdict == Verdict::False, "\" false\\n\" is not false");
    const auto prose = verdict_for("It is true.");
    o.expect(prose.verdict == Verdict::Invalid && prose.raw == "It is true.", "prose is not invalid with raw kept");
    o.detail = "golden prompt + TRUE / \" false\\n\" / prose";
    return o;
}

// ---------------------------------------------------------------- end to end

int cli(std::vector<std::string> args, std::string& err_text) {
    args.insert(args.begin(), "ragkit");
    std::vector<char*> argv;
    for (auto& a : args) argv.push_back(a.data());
    std::ostringstream out;
    std::ostringstream err;
    const int code = cli_dispatch(static_cast<int>(argv.size()), argv.data(), out, err);
    err_text = err.str();
    return code;
}

std::string run_http_job(httplib::Client& client, const json& body) {
    const auto res = client.Post("/api/jobs", body.dump(), "application/json");
    if (!res) return "no response";
    if (res->status != 202) return "HTTP " + std::to_string(res->status) + ": " + res->body;
    const auto id = json::parse(res->body)["job_id"].get<std::string>();
    for (int i = 0; i < 6000; ++i) {
        const auto status = client.Get("/api/jobs/" + id);
        if (!status) return "no status response";
        const auto j = json::parse(status->body);
        if (j["state"] == "succeeded") return {};
        if (j["state"] == "failed") return j.value("error", std::string("failed"));
        std::this_thread::sleep_for(std::chrono::milliseconds(10));
    }
    return "timed out";
}

Outcome check_end_to_end() {
    Outcome o;
    const fs::path fixtures = fs::path(RAGKIT_TEST_DATA_DIR) / "fixtures";
    const auto manifest = fixtures / "corpus" / "manifest.json";
    const auto dataset = fixtures / "dataset20.jsonl";

    testing::MockOptions options;
    options.answers = testing::answers_from_dataset(dataset);
    testing::MockEndpoint mock(options);
    auto config_json = test::mock_config(mock.base_url(), manifest);
    config_json["retrieval"] = {{"validation", dataset.string()}};

    ScratchDir root("e2e");
    const auto cli_config = test::write_config(root.path() / "cli", config_json);
    const auto http_config = test::write_config(root.path() / "http", config_json);

    // CLI run.
    const std::string cfg = cli_config.string();
    const std::vector<std::vector<std::string>> steps{{"ingest", "--config", cfg},
                                                      {"datagen", "--config", cfg},
                                                      {"index", "--config", cfg},
                                                      {"choose-strategy", "--config", cfg},
                                                      {"eval", "--config", cfg, "--dataset", dataset.string(), "--mode", "judge"}};
    for (const auto& step : steps) {
        std::string err;
        o.expect(cli(step, err) == kExitOk, "cli " + step[0] + " failed: " + err);
    }

    // HTTP run.
    {
        const auto config = load_config(http_config);
        Service service(config, ModelClients::from_config(config), quiet_logger());
        service.start();
        httplib::Client client("127.0.0.1", service.port());
        client.set_read_timeout(60, 0);
        for (const auto& job : {json{{"kind", "ingest"}}, json{{"kind", "datagen"}}, json{{"kind", "index"}},
                                json{{"kind", "eval_retrieval"}},
                                json{{"kind", "eval_answers"}, {"params", {{"dataset", dataset.string()}, {"mode", "judge"}}}}}) {
            const auto error = run_http_job(client, job);
            o.expect(error.empty(), "http job " + job["kind"].get<std::string>() + " failed: " + error);
        }
        service.stop();
    }

    const auto report_of = [](const fs::path& dir) {
        const auto path = dir / "ws" / "reports" / "dataset20" / "report.json";
        return fs::exists(path) ? read_json_file(path) : json();
    };
    auto cli_report = report_of(root.path() / "cli");
    auto http_report = report_of(root.path() / "http");
    o.expect(!cli_report.is_null() && !http_report.is_null(), "report.json missing");
    if (cli_report.is_null() || http_report.is_null()) return o;

    const double accuracy = cli_report["answers"]["accuracy"].get<double>();
    o.expect(accuracy == 1.0, "accuracy " + std::to_string(accuracy));
    o.expect(cli_report["answers"]["n_items"] == 20, "expected 20 items");
    o.expect(cli_report["retrieval"]["chosen"].is_string(), "retrieval section missing");
    cli_report.erase("timings");
    http_report.erase("timings");
    o.expect(cli_report == http_report, "CLI and HTTP report.json differ outside timings");

    std::string chosen = cli_report["retrieval"]["chosen"].get<std::string>();
    char buf[96];
    std::snprintf(buf, sizeof buf, "accuracy %.2f, strategy %s, reports identical", accuracy, chosen.c_str());
    o.detail = buf;
    return o;
}

struct Criterion {
    const char* name;
    double limit_s; ///< 0 = no time limit
    std::function<Outcome()> run;
};

} // namespace

int main() {
    const std::vector<Criterion> criteria{
        {"bm25-oracle", 10, check_bm25},
        {"dense-exact-topk", 30, check_dense},
        {"rrf-fusion", 5, check_rrf},
        {"strategy-selection", 0, check_strategy},
        {"datagen-invariants", 0, check_datagen},
        {"chunking", 0, check_chunking},
        {"judge-prompt", 0, check_judge},
        {"end-to-end", 60, check_end_to_end},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        const auto started = std::chrono::steady_clock::now();
        Outcome outcome;
        try {
            outcome = c.run();
        } catch (const std::exception& e) {
            outcome.failures.push_back(std::string("exception: ") + e.what());
        }
        const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        if (c.limit_s > 0 && elapsed > c.limit_s) {
            outcome.failures.push_back("took " + format_seconds(elapsed) + ", limit " + format_seconds(c.limit_s));
        }
        const bool ok = outcome.passed();
        failed += ok ? 0 : 1;
        std::cout << (ok ? "PASS " : "FAIL ") << c.name << ": " << outcome.detail << " [" << outcome.checks << " checks, "
                  << format_seconds(elapsed) << (c.limit_s > 0 ? " of " + format_seconds(c.limit_s) : std::string()) << "]\n";
        for (const auto& f : outcome.failures) std::cout << "     - " << f << '\n';
        std::cout.flush();
    }
    std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed") << '\n';
    return failed == 0 ? 0 : 1;
}

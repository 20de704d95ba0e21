/**
 * @file test_evalharness.cpp
 * @brief Dataset loading, retrieval evaluation and answer evaluation reports.
 */
#include "ragkit/evalharness.hpp"

#include "oracles.hpp"
#include "ragkit/jsonl.hpp"
#include "test_support.hpp"

using namespace ragkit;
using test::error_code_of;

TEST_CASE("dataset loading") {
    test::TempDir dir;
    write_text_file(dir / "empty.jsonl", "");
    CHECK(load_dataset(dir / "empty.jsonl").empty());

    write_text_file(dir / "three.jsonl", R"({"question":"q1","gold_answer":"a1"}
{"question":"q2","gold_answer":"a2","gold_chunk_ids":["x-0000"]}

{"question":"q3","gold_answer":"a3"}
)");
    const auto items = load_dataset(dir / "three.jsonl");
    REQUIRE(items.size() == 3);
    CHECK(items[0].question == "q1");
    CHECK_FALSE(items[0].gold_chunk_ids);
    CHECK(items[1].gold_chunk_ids == std::vector<std::string>{"x-0000"});
    CHECK(items[2].gold_answer == "a3");

    write_text_file(dir / "bad.jsonl", "{\"question\":\"q1\",\"gold_answer\":\"a1\"}\n{\"gold_answer\":\"a2\"}\n");
    try {
        load_dataset(dir / "bad.jsonl");
        FAIL("expected SchemaError");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::SchemaError);
        CHECK(std::string(e.what()).find(":2") != std::string::npos);
    }
    const auto lenient = load_dataset_lenient(dir / "bad.jsonl");
    CHECK(lenient.items.size() == 1);
    CHECK(lenient.errors.size() == 1);
    CHECK(error_code_of([&] { load_dataset(dir / "missing.jsonl"); }) == ErrorCode::IoError);
}

TEST_CASE("retrieval evaluation mirrors strategy selection") {
    const auto fixture = oracle::semantic_fixture();
    const Retriever retriever(fixture.corpus, fixture.embedder);
    std::vector<EvalItem> items;
    for (const auto& v : fixture.validation) items.push_back({v.question, "x", v.gold_chunk_ids});
    const auto report = run_retrieval_eval(items, 1, retriever);
    CHECK(report.chosen == StrategyKind::semantic);
    CHECK(report.per_strategy.at(StrategyKind::semantic) == 1.0);

    items.push_back({"no gold", "x", std::nullopt});
    CHECK(error_code_of([&] { run_retrieval_eval(items, 1, retriever); }) == ErrorCode::MissingGoldChunks);
}

TEST_CASE("strict k=1 hit rate counts only rank-1 golds") {
    const auto fixture = oracle::hybrid_fixture();
    const Retriever retriever(fixture.corpus, fixture.embedder);
    std::vector<EvalItem> items;
    for (const auto& v : fixture.validation) items.push_back({v.question, "x", v.gold_chunk_ids});
    const auto report = run_retrieval_eval(items, 1, retriever);
    for (const auto kind : {StrategyKind::semantic, StrategyKind::bm25, StrategyKind::hybrid}) {
        std::size_t at_one = 0;
        for (const auto& item : items) {
            const auto top = retriever.search(kind, item.question, 1);
            at_one += !top.empty() && top[0].chunk_id == (*item.gold_chunk_ids)[0];
        }
        CHECK(report.per_strategy.at(kind) == static_cast<double>(at_one) / items.size());
    }
}

namespace {

struct EvalFixture {
    std::shared_ptr<Corpus> corpus = test::make_corpus({{"a-0000", "the capital of france is paris"},
                                                        {"b-0000", "the tallest mountain is everest"},
                                                        {"c-0000", "water boils at one hundred degrees"},
                                                        {"d-0000", "the largest ocean is the pacific"}});
    std::shared_ptr<testing::MockModel> embedder = std::make_shared<testing::MockModel>();
    Retriever retriever{corpus, embedder};
    std::vector<EvalItem> items{{"capital of france?", "Paris", std::vector<std::string>{"a-0000"}},
                                {"tallest mountain?", "Everest", std::vector<std::string>{"b-0000"}},
                                {"boiling point?", "100 degrees", std::vector<std::string>{"c-0000"}},
                                {"largest ocean?", "Pacific", std::vector<std::string>{"d-0000"}}};
    EvalFixture() { retriever.lock_strategy(StrategyKind::hybrid); }
};

} // namespace

TEST_CASE("exact-mode accuracy: 3 of 4") {
    EvalFixture f;
    testing::MockOptions opts;
    opts.answers = {{"capital of france?", "Paris."}, {"tallest mountain?", "the everest"}, {"boiling point?", "100 degrees"},
                    {"largest ocean?", "Atlantic"}};
    testing::MockModel generator(opts);
    const auto report = run_answer_eval(f.items, {AnswerMode::exact, {}, 2}, f.retriever, generator, nullptr);
    CHECK(report.accuracy == 0.75);
    CHECK(report.correct_count == 3);
    CHECK(report.per_item[3].verdict == "mismatch");
    CHECK(report.per_item[0].verdict == "match");
    CHECK(report.per_item[0].context_ids.size() == 4);
}

TEST_CASE("judge mode closes the loop with an equality judge") {
    EvalFixture f;
    testing::MockOptions opts;
    for (const auto& item : f.items) opts.answers[item.question] = item.gold_answer;
    testing::MockModel model(opts);
    const auto report = run_answer_eval(f.items, {AnswerMode::judge, {}, 3}, f.retriever, model, &model);
    CHECK(report.accuracy == 1.0);
    CHECK(report.per_item[2].verdict == "true");
    CHECK(error_code_of([&] { run_answer_eval(f.items, {AnswerMode::judge, {}, 1}, f.retriever, model, nullptr); }) ==
          ErrorCode::InvalidArgument);
}

TEST_CASE("generation failures are recorded per item") {
    EvalFixture f;
    testing::ScriptedChat failing([](const ChatRequest& r) -> std::string {
        if (r.user.find("boiling") != std::string::npos) throw Error(ErrorCode::TransportError, "down");
        return "x";
    });
    const auto report = run_answer_eval(f.items, {AnswerMode::exact, {}, 1}, f.retriever, failing, nullptr);
    CHECK(report.per_item[2].verdict == "error");
    CHECK(report.invalid_count == 1);
    CHECK(report.accuracy == 0.0);
}

TEST_CASE("report json is deterministic apart from timings") {
    EvalFixture f;
    testing::MockOptions opts;
    for (const auto& item : f.items) opts.answers[item.question] = item.gold_answer;
    testing::MockModel model(opts);
    auto first = run_answer_eval(f.items, {AnswerMode::exact, {}, 4}, f.retriever, model, nullptr);
    auto second = run_answer_eval(f.items, {AnswerMode::exact, {}, 1}, f.retriever, model, nullptr);
    first.dataset_id = second.dataset_id = "fixture";
    auto a = first.to_json();
    auto b = second.to_json();
    CHECK(a.contains("timings"));
    a.erase("timings");
    b.erase("timings");
    CHECK(a.dump() == b.dump());
    CHECK(a["answers"]["accuracy"] == 1.0);

    test::TempDir dir;
    first.write(dir.path());
    CHECK(read_text_file(dir / "report.md").find("| exact | 4 | 4 | 0 | 100.0% |") != std::string::npos);
}

TEST_CASE("markdown formats accuracy with one decimal") {
    EvalReport report;
    report.dataset_id = "d";
    report.accuracy = 0.75;
    report.correct_count = 3;
    report.per_item.resize(4);
    CHECK(report.to_markdown().find("75.0%") != std::string::npos);
    CHECK(report.to_markdown().find("Retrieval") == std::string::npos);
}

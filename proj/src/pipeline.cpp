/**
 * @file pipeline.cpp
 * @brief Workspace-level pipeline stages.
 */
#include "ragkit/pipeline.hpp"

#include "ragkit/error.hpp"
#include "ragkit/jsonl.hpp"
#include "ragkit/parallel.hpp"

#include <atomic>
#include <chrono>

namespace ragkit {

namespace {

namespace fs = std::filesystem;

std::vector<Chunk> read_ingested_chunks(const PipelineConfig& config) {
    if (!fs::exists(config.chunks_path())) {
        fail(ErrorCode::IoError, "no ingested chunks at " + config.chunks_path().string() + " (run ingest first)");
    }
    return read_chunks_jsonl(config.chunks_path());
}

RankFn semantic_ranker(const Retriever& retriever) {
    return [&retriever](std::string_view query, std::size_t k) { return retriever.semantic_search(query, k); };
}

std::size_t workers_for(const EndpointConfig& e) { return static_cast<std::size_t>(e.max_concurrency); }

} // namespace

ModelClients ModelClients::from_config(const PipelineConfig& config) {
    ModelClients m;
    m.embedder = std::make_shared<HttpGateway>(config.embedding);
    m.generator = std::make_shared<HttpGateway>(config.generator);
    if (config.judge) m.judge = std::make_shared<HttpGateway>(*config.judge);
    return m;
}

IngestSummary run_ingest(const StageContext& ctx, const std::optional<fs::path>& manifest_override) {
    const auto manifest_path = manifest_override ? manifest_override : ctx.config.corpus_manifest;
    if (!manifest_path) fail(ErrorCode::ConfigError, "no corpus manifest configured");
    const IngestManifest manifest = load_ingest_manifest(*manifest_path);
    ctx.log.info("ingesting " + std::to_string(manifest.documents.size()) + " documents from " + manifest_path->string());

    std::vector<std::vector<Chunk>> per_doc(manifest.documents.size());
    std::atomic<std::size_t> done{0};
    parallel_for(manifest.documents.size(), std::thread::hardware_concurrency(), [&](std::size_t i) {
        per_doc[i] = ingest_document(manifest.documents[i], ctx.config.chunking);
        ctx.progress(static_cast<double>(++done) / static_cast<double>(manifest.documents.size()));
    });
    std::vector<Chunk> chunks;
    for (auto& doc_chunks : per_doc) {
        for (auto& c : doc_chunks) chunks.push_back(std::move(c));
    }
    write_chunks_jsonl(ctx.config.chunks_path(), chunks);
    ctx.log.info("wrote " + std::to_string(chunks.size()) + " chunks to " + ctx.config.chunks_path().string());
    return {manifest.documents.size(), chunks.size(), ctx.config.chunks_path()};
}

DatagenSummary run_datagen(const StageContext& ctx) {
    Corpus corpus;
    corpus.chunks = read_ingested_chunks(ctx.config);
    corpus.rebuild_lookup();
    const auto& dg = ctx.config.datagen;
    const std::size_t workers = workers_for(ctx.config.generator);
    ChatModel& model = *ctx.models.generator;

    std::vector<std::vector<QAPair>> per_chunk(corpus.chunks.size());
    std::atomic<std::size_t> done{0};
    parallel_for(corpus.chunks.size(), workers, [&](std::size_t i) {
        try {
            per_chunk[i] = generate_qa(corpus.chunks[i], model, dg.n_simple, dg.n_complex, &ctx.log);
        } catch (const Error& e) {
            ctx.log.warn("question generation failed for " + corpus.chunks[i].chunk_id + ": " + e.what());
        }
        ctx.progress(0.5 * static_cast<double>(++done) / static_cast<double>(std::max<std::size_t>(1, corpus.chunks.size())));
    });
    std::vector<QAPair> generated;
    for (auto& list : per_chunk) {
        for (auto& p : list) generated.push_back(std::move(p));
    }
    const auto validated = validate_qa(generated, corpus, model, workers, &ctx.log);
    ctx.progress(1.0);

    fs::create_directories(ctx.config.datagen_dir());
    write_qa_jsonl(ctx.config.datagen_dir() / "qa_generated.jsonl", generated);
    const auto qa_path = ctx.config.datagen_dir() / "qa.jsonl";
    write_qa_jsonl(qa_path, validated);
    ctx.log.info("generated " + std::to_string(generated.size()) + " questions, kept " +
                 std::to_string(validated.size()) + " answerable");
    return {generated.size(), validated.size(), qa_path};
}

IndexSummary run_index(const StageContext& ctx) {
    auto corpus = std::make_shared<Corpus>();
    corpus->chunks = read_ingested_chunks(ctx.config);
    corpus->rebuild_lookup();
    ctx.log.info("indexing " + std::to_string(corpus->chunks.size()) + " chunks");

    corpus->bm25 = InvertedIndex::build(corpus->chunks, ctx.config.retrieval.bm25);
    ctx.progress(0.1);

    std::vector<std::string> texts;
    texts.reserve(corpus->chunks.size());
    for (const auto& c : corpus->chunks) texts.push_back(c.core_text);
    const auto vectors = embed_in_batches(*ctx.models.embedder, texts, ctx.config.embedding.batch_limit);
    if (vectors.size() != texts.size()) fail(ErrorCode::DimsInconsistent, "embedding count mismatch");
    std::vector<std::pair<std::string, std::vector<float>>> pairs;
    pairs.reserve(vectors.size());
    for (std::size_t i = 0; i < vectors.size(); ++i) pairs.emplace_back(corpus->chunks[i].chunk_id, vectors[i]);
    corpus->embeddings = EmbeddingStore(vectors.empty() ? 0 : vectors.front().size());
    corpus->embeddings.upsert(pairs);
    ctx.progress(0.9);

    const auto manifest_id = ctx.config.corpus_manifest ? ctx.config.corpus_manifest->parent_path().filename().string()
                                                        : std::string("corpus");
    corpus->manifest.corpus_id = manifest_id;
    corpus->manifest.chunk_count = corpus->chunks.size();
    corpus->manifest.embedding_model_id = ctx.models.embedder->model_id();
    corpus->manifest.embedding_dims = corpus->embeddings.dims();
    corpus->manifest.created_at = utc_timestamp();

    const fs::path target = ctx.config.corpus_dir();
    fs::path staging = target;
    staging += ".staging";
    fs::path retired = target;
    retired += ".retired";
    fs::remove_all(staging);
    fs::remove_all(retired);
    save_corpus(staging, *corpus);
    if (fs::exists(target)) fs::rename(target, retired);
    fs::rename(staging, target);
    fs::remove_all(retired);
    ctx.progress(1.0);
    ctx.log.info("corpus written to " + target.string());
    return {corpus->chunks.size(), corpus->embeddings.dims(), target};
}

std::shared_ptr<const Corpus> load_workspace_corpus(const PipelineConfig& config) {
    return std::make_shared<const Corpus>(load_corpus(config.corpus_dir()));
}

std::shared_ptr<Retriever> make_retriever(const PipelineConfig& config, std::shared_ptr<const Corpus> corpus,
                                          std::shared_ptr<Embedder> embedder) {
    RetrievalStrategy defaults;
    defaults.rrf_k = config.retrieval.rrf_k;
    defaults.fuse_depth = config.retrieval.fuse_depth;
    auto retriever = std::make_shared<Retriever>(std::move(corpus), std::move(embedder), defaults);
    if (config.retrieval.strategy) {
        retriever->lock_strategy(*config.retrieval.strategy);
    } else if (const auto path = config.corpus_dir() / kStrategyFile; fs::exists(path)) {
        retriever->lock_strategy(StrategyReport::load(path).chosen);
    }
    return retriever;
}

StrategyReport run_choose_strategy(const StageContext& ctx, const std::optional<fs::path>& validation_override) {
    const auto validation_path = validation_override ? validation_override : ctx.config.retrieval.validation_path;
    if (!fs::exists(ctx.config.corpus_dir() / kManifestFile)) {
        fail(ErrorCode::IoError, "no indexed corpus at " + ctx.config.corpus_dir().string() + " (run index first)");
    }
    StrategyReport report;
    report.k_eval = ctx.config.k_eval();
    if (!validation_path) {
        ctx.log.info("no validation set configured; locking the semantic strategy");
        report.chosen = StrategyKind::semantic;
    } else {
        auto retriever = make_retriever(ctx.config, load_workspace_corpus(ctx.config), ctx.models.embedder);
        report = run_retrieval_eval(load_dataset(*validation_path), ctx.config.k_eval(), *retriever);
        for (const auto& [kind, score] : report.per_strategy) {
            ctx.log.info(std::string(strategy_name(kind)) + " hit_rate@" + std::to_string(report.k_eval) + " = " +
                         std::to_string(score));
        }
    }
    report.save(ctx.config.corpus_dir() / kStrategyFile);
    ctx.progress(1.0);
    ctx.log.info("chosen strategy: " + std::string(strategy_name(report.chosen)));
    return report;
}

ExportSummary run_export_ft(const StageContext& ctx) {
    const auto corpus = load_workspace_corpus(ctx.config);
    const auto qa_path = ctx.config.datagen_dir() / "qa.jsonl";
    if (!fs::exists(qa_path)) fail(ErrorCode::IoError, "no validated QA pairs at " + qa_path.string() + " (run datagen first)");
    const auto pairs = read_qa_jsonl(qa_path);
    // Mining and context expansion use the base (pre-fine-tune) embedding model.
    Retriever retriever(corpus, ctx.models.embedder);
    const RankFn rank = semantic_ranker(retriever);
    const auto& dg = ctx.config.datagen;

    FineTuneExport data;
    data.embed_examples = build_embed_examples(pairs, rank, corpus->chunks.size(), dg.pool_k, dg.seed);
    ctx.progress(0.5);
    data.batches = build_batches(data.embed_examples, dg.batch_size, dg.seed);
    std::vector<std::string> ids;
    ids.reserve(corpus->chunks.size());
    for (const auto& c : corpus->chunks) ids.push_back(c.chunk_id);
    std::sort(ids.begin(), ids.end());
    data.triplets = build_expanded_triplets(pairs, rank, ids, dg.n_expanded, dg.seed);
    write_finetune_files(ctx.config.finetune_dir(), data, *corpus);
    ctx.progress(1.0);
    ctx.log.info("exported " + std::to_string(data.embed_examples.size()) + " embedding examples in " +
                 std::to_string(data.batches.size()) + " batches and " + std::to_string(data.triplets.size()) + " triplets");
    return {data.embed_examples.size(), data.batches.size(), data.triplets.size(), ctx.config.finetune_dir()};
}

AnswerRequest answer_request_from_config(const PipelineConfig& config, std::string question, std::optional<std::size_t> n) {
    AnswerRequest r;
    r.question = std::move(question);
    r.n_contexts = n.value_or(config.answer.n_contexts);
    r.max_tokens = config.answer.max_tokens;
    r.temperature = config.answer.temperature;
    return r;
}

nlohmann::ordered_json answer_to_json(const AnswerResult& result) {
    nlohmann::ordered_json j;
    j["answer"] = result.answer;
    nlohmann::ordered_json contexts = nlohmann::ordered_json::array();
    for (const auto& c : result.contexts) {
        nlohmann::ordered_json item;
        item["chunk_id"] = c.chunk_id;
        item["text"] = c.text;
        item["score"] = c.score;
        item["rank"] = c.rank;
        contexts.push_back(item);
    }
    j["contexts"] = contexts;
    return j;
}

EvalReport run_eval(const StageContext& ctx, const EvalRequest& request, fs::path* written_dir) {
    const auto items = load_dataset(request.dataset);
    if (items.empty()) fail(ErrorCode::SchemaError, request.dataset.string() + " has no items");
    auto retriever = make_retriever(ctx.config, load_workspace_corpus(ctx.config), ctx.models.embedder);
    if (!retriever->locked_strategy()) fail(ErrorCode::NoStrategyChosen, "run choose-strategy first or set retrieval.strategy");

    std::optional<StrategyReport> retrieval;
    const bool all_gold = std::all_of(items.begin(), items.end(), [](const EvalItem& i) {
        return i.gold_chunk_ids && !i.gold_chunk_ids->empty();
    });
    if (all_gold) retrieval = run_retrieval_eval(items, ctx.config.k_eval(), *retriever);
    ctx.progress(0.1);

    AnswerEvalOptions options;
    options.mode = request.mode;
    options.request_template = answer_request_from_config(ctx.config, "");
    options.workers = workers_for(ctx.config.generator);
    if (request.mode == AnswerMode::judge && !ctx.models.judge) fail(ErrorCode::ConfigError, "judge mode needs endpoints.judge");
    EvalReport report = run_answer_eval(items, options, *retriever, *ctx.models.generator, ctx.models.judge.get(), &ctx.log);
    report.dataset_id = request.dataset.stem().string();
    report.retrieval = retrieval;
    report.config_snapshot = redacted_config(ctx.config);

    const fs::path out = request.out_dir.value_or(ctx.config.reports_dir() / report.dataset_id);
    report.write(out);
    if (written_dir != nullptr) *written_dir = out;
    ctx.progress(1.0);
    ctx.log.info("accuracy " + std::to_string(report.accuracy) + " over " + std::to_string(items.size()) +
                 " items; report at " + (out / "report.json").string());
    return report;
}

} // namespace ragkit

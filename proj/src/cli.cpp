/**
 * @file cli.cpp
 * @brief Subcommands over the pipeline stages.
 */
#include "ragkit/cli.hpp"

#include "ragkit/error.hpp"
#include "ragkit/pipeline.hpp"
#include "ragkit/service.hpp"

#include <CLI11.hpp>

#include <atomic>
#include <csignal>
#include <iostream>
#include <thread>

namespace ragkit {

namespace {

std::atomic<bool> g_stop{false};

extern "C" void on_stop_signal(int) { g_stop = true; }

Logger stream_logger(std::ostream& err, const PipelineConfig* config) {
    return Logger([&err, config](LogLevel level, std::string_view message) {
        std::string line(message);
        if (config != nullptr) line = scrub_secrets(*config, std::move(line));
        err << '[' << log_level_name(level) << "] " << line << '\n';
    });
}

} // namespace

int cli_dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"ragkit: retrieval-augmented QA pipeline", "ragkit"};
    app.require_subcommand(1, 1);

    std::string config_path;
    auto with_config = [&config_path](CLI::App* sub) {
        sub->add_option("--config", config_path, "Pipeline config (JSON)")->required()->check(CLI::ExistingFile);
        return sub;
    };

    std::string manifest;
    auto* ingest = with_config(app.add_subcommand("ingest", "Convert and chunk the corpus into chunks.jsonl"));
    ingest->add_option("--manifest", manifest, "Override corpus.manifest");

    auto* datagen = with_config(app.add_subcommand("datagen", "Generate and validate QA pairs"));
    auto* index = with_config(app.add_subcommand("index", "Embed chunks and build the BM25 index"));

    std::string validation;
    auto* choose = with_config(app.add_subcommand("choose-strategy", "Pick and lock the retrieval strategy"));
    choose->add_option("--validation", validation, "Validation JSONL with gold_chunk_ids");

    std::string question;
    std::size_t n_contexts = 0;
    std::string strategy;
    bool as_json = false;
    auto* answer = with_config(app.add_subcommand("answer", "Answer one question from the indexed corpus"));
    answer->add_option("--question", question, "Question text")->required();
    answer->add_option("--n", n_contexts, "Number of contexts")->check(CLI::PositiveNumber);
    answer->add_option("--strategy", strategy, "semantic | bm25 | hybrid")->check(CLI::IsMember({"semantic", "bm25", "hybrid"}));
    answer->add_flag("--json", as_json, "Print the /api/answer JSON body");

    std::string dataset;
    std::string mode;
    std::string out_dir;
    auto* eval = with_config(app.add_subcommand("eval", "Evaluate retrieval and answers on a labeled dataset"));
    eval->add_option("--dataset", dataset, "Dataset JSONL")->required()->check(CLI::ExistingFile);
    eval->add_option("--mode", mode, "exact | judge (default: judge when configured)")->check(CLI::IsMember({"exact", "judge"}));
    eval->add_option("--out", out_dir, "Report directory (default: <workspace>/reports/<dataset stem>)");

    auto* export_ft = with_config(app.add_subcommand("export-ft", "Write fine-tuning files"));

    std::string host;
    int port = -1;
    auto* serve = with_config(app.add_subcommand("serve", "Run the HTTP service"));
    serve->add_option("--host", host, "Override server.host");
    serve->add_option("--port", port, "Override server.port")->check(CLI::Range(0, 65535));

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        err << app.help();
        return kExitUsage;
    }

    std::optional<PipelineConfig> config;
    try {
        config = load_config(config_path);
        if (!host.empty()) config->server.host = host;
        if (port >= 0) config->server.port = port;
        const Logger log = stream_logger(err, &*config);
        const ModelClients models = ModelClients::from_config(*config);
        const StageContext ctx{*config, models, log};

        if (ingest->parsed()) {
            const auto s = run_ingest(ctx, manifest.empty() ? std::nullopt : std::optional<std::filesystem::path>(manifest));
            out << s.chunks << " chunks from " << s.documents << " documents written to " << s.chunks_path.string() << '\n';
        } else if (datagen->parsed()) {
            const auto s = run_datagen(ctx);
            out << s.validated << " of " << s.generated << " QA pairs validated; written to " << s.qa_path.string() << '\n';
        } else if (index->parsed()) {
            const auto s = run_index(ctx);
            out << s.chunks << " chunks indexed (" << s.dims << " dims) in " << s.corpus_dir.string() << '\n';
        } else if (choose->parsed()) {
            const auto report = run_choose_strategy(
                ctx, validation.empty() ? std::nullopt : std::optional<std::filesystem::path>(validation));
            out << report.to_json().dump(2) << '\n';
        } else if (answer->parsed()) {
            auto request = answer_request_from_config(*config, question,
                                                      n_contexts > 0 ? std::optional<std::size_t>(n_contexts) : std::nullopt);
            if (!strategy.empty()) request.strategy_override = parse_strategy(strategy);
            const auto retriever = make_retriever(*config, load_workspace_corpus(*config), models.embedder);
            const auto result = synthesize(request, *retriever, *models.generator);
            if (as_json) {
                out << answer_to_json(result).dump() << '\n';
            } else {
                out << result.answer << '\n';
                for (const auto& c : result.contexts) out << c.rank << '\t' << c.chunk_id << '\t' << c.score << '\n';
            }
        } else if (eval->parsed()) {
            EvalRequest request;
            request.dataset = dataset;
            request.mode = !mode.empty() ? parse_answer_mode(mode) : (models.judge ? AnswerMode::judge : AnswerMode::exact);
            if (!out_dir.empty()) request.out_dir = std::filesystem::path(out_dir);
            std::filesystem::path written;
            const auto report = run_eval(ctx, request, &written);
            out << "accuracy " << report.accuracy << " (" << report.correct_count << "/" << report.per_item.size()
                << ", invalid " << report.invalid_count << "); report in " << written.string() << '\n';
        } else if (export_ft->parsed()) {
            const auto s = run_export_ft(ctx);
            out << s.embed_examples << " embedding examples, " << s.batches << " batches, " << s.triplets
                << " triplets written to " << s.dir.string() << '\n';
        } else if (serve->parsed()) {
            Service service(*config, models, log);
            g_stop = false;
            std::signal(SIGINT, on_stop_signal);
            std::signal(SIGTERM, on_stop_signal);
            const int bound = service.start();
            out << "listening on http://" << config->server.host << ':' << bound << std::endl;
            while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(100));
            service.stop();
        }
    } catch (const Error& e) {
        err << "error: " << (config ? scrub_secrets(*config, e.what()) : std::string(e.what())) << '\n';
        return kExitFailure;
    } catch (const std::exception& e) {
        err << "error: " << (config ? scrub_secrets(*config, e.what()) : std::string(e.what())) << '\n';
        return kExitFailure;
    }
    return kExitOk;
}

} // namespace ragkit

/**
 * @file service.cpp
 * @brief HTTP routes and job runners.
 */
#include "ragkit/service.hpp"

#include "ragkit/error.hpp"
#include "ragkit/jsonl.hpp"

#include <httplib.h>

#include <set>

namespace ragkit {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

/// Checks that `params` is an object with only `allowed` keys of the given JSON types.
std::optional<std::string> check_params(const json& params, const std::map<std::string, json::value_t>& allowed) {
    if (!params.is_object()) return "params must be an object";
    for (const auto& [key, value] : params.items()) {
        const auto it = allowed.find(key);
        if (it == allowed.end()) return "unknown parameter '" + key + "'";
        const bool ok = it->second == json::value_t::number_unsigned ? value.is_number_unsigned() : value.type() == it->second;
        if (!ok) return "parameter '" + key + "' has the wrong type";
    }
    return std::nullopt;
}

int status_for(const Error& e) {
    if (e.is_upstream()) return 502;
    switch (e.code()) {
    case ErrorCode::EmptyCorpus:
    case ErrorCode::EmptyStore: return 503;
    case ErrorCode::NoStrategyChosen: return 409;
    case ErrorCode::InvalidArgument: return 422;
    default: return 500;
    }
}

} // namespace

struct Service::Impl {
    httplib::Server server;
};

Service::Service(PipelineConfig config, ModelClients models, Logger log)
    : config_(std::move(config)), models_(std::move(models)), log_(std::move(log)),
      jobs_(std::make_unique<JobRegistry>(config_.jobs_journal())), impl_(std::make_unique<Impl>()) {
    reload_corpus();
    install_routes();
}

Service::~Service() {
    stop();
    jobs_->wait_all();
}

void Service::reload_corpus() {
    std::shared_ptr<Retriever> next;
    if (fs::exists(config_.corpus_dir() / kManifestFile)) {
        next = make_retriever(config_, load_workspace_corpus(config_), models_.embedder);
    }
    std::lock_guard lock(retriever_mutex_);
    retriever_ = std::move(next);
}

std::shared_ptr<Retriever> Service::retriever() const {
    std::lock_guard lock(retriever_mutex_);
    return retriever_;
}

ApiResponse Service::error_response(int status, const std::string& message) const {
    ApiResponse r;
    r.status = status;
    r.body["error"] = scrub_secrets(config_, message);
    return r;
}

std::string Service::run_job(JobKind kind, const json& params, JobHandle& handle) {
    const PipelineConfig& config = config_;
    Logger job_log([this, &handle](LogLevel level, std::string_view message) {
        const std::string line = scrub_secrets(config_, std::string(message));
        handle.log(std::string(log_level_name(level)) + ": " + line);
        log_.log(level, line);
    });
    StageContext ctx{config, models_, job_log, [&handle](double p) { handle.progress(p); }};
    switch (kind) {
    case JobKind::ingest: {
        std::optional<fs::path> manifest;
        if (params.contains("manifest")) manifest = fs::path(params["manifest"].get<std::string>());
        return run_ingest(ctx, manifest).chunks_path.string();
    }
    case JobKind::datagen: return run_datagen(ctx).qa_path.string();
    case JobKind::index: {
        const auto summary = run_index(ctx);
        reload_corpus();
        return summary.corpus_dir.string();
    }
    case JobKind::eval_retrieval: {
        std::optional<fs::path> validation;
        if (params.contains("validation")) validation = fs::path(params["validation"].get<std::string>());
        run_choose_strategy(ctx, validation);
        reload_corpus();
        return (config.corpus_dir() / kStrategyFile).string();
    }
    case JobKind::eval_answers: {
        EvalRequest request;
        request.dataset = params.at("dataset").get<std::string>();
        request.mode = params.contains("mode") ? parse_answer_mode(params["mode"].get<std::string>())
                                               : (models_.judge ? AnswerMode::judge : AnswerMode::exact);
        if (params.contains("name")) request.out_dir = config.reports_dir() / params["name"].get<std::string>();
        fs::path out;
        run_eval(ctx, request, &out);
        return (out / "report.json").string();
    }
    case JobKind::export_ft: return run_export_ft(ctx).dir.string();
    }
    return {};
}

ApiResponse Service::submit_job(const json& body) {
    if (!body.is_object() || !body.contains("kind") || !body["kind"].is_string()) {
        return error_response(422, "body must be {\"kind\": string, \"params\"?: object}");
    }
    for (const auto& [key, value] : body.items()) {
        if (key != "kind" && key != "params") return error_response(422, "unknown field '" + key + "'");
    }
    JobKind kind{};
    try {
        kind = parse_job_kind(body["kind"].get<std::string>());
    } catch (const Error& e) {
        return error_response(422, e.what());
    }
    const json params = body.value("params", json::object());
    const auto S = json::value_t::string;
    std::optional<std::string> problem;
    switch (kind) {
    case JobKind::ingest: problem = check_params(params, {{"manifest", S}}); break;
    case JobKind::eval_retrieval: problem = check_params(params, {{"validation", S}}); break;
    case JobKind::eval_answers:
        problem = check_params(params, {{"dataset", S}, {"mode", S}, {"name", S}});
        if (!problem && !params.contains("dataset")) problem = "parameter 'dataset' is required";
        if (!problem && params.contains("mode")) {
            try {
                parse_answer_mode(params["mode"].get<std::string>());
            } catch (const Error& e) {
                problem = e.what();
            }
        }
        if (!problem && params.contains("name")) {
            const auto name = params["name"].get<std::string>();
            if (name.empty() || name.find('/') != std::string::npos || name.find("..") != std::string::npos) {
                problem = "parameter 'name' must be a plain directory name";
            }
        }
        if (!problem && params.value("mode", "judge") == "judge" && !models_.judge && params.contains("mode")) {
            problem = "judge mode needs endpoints.judge in the config";
        }
        break;
    default: problem = check_params(params, {}); break;
    }
    if (problem) return error_response(422, *problem);

    try {
        const auto id = jobs_->submit(kind, params, [this, kind](const json& p, JobHandle& h) { return run_job(kind, p, h); });
        ApiResponse r;
        r.status = 202;
        r.body["job_id"] = id;
        return r;
    } catch (const JobConflict& e) {
        return error_response(409, e.what());
    }
}

ApiResponse Service::job_status(const std::string& id) const {
    const auto status = jobs_->get(id);
    if (!status) return error_response(404, "unknown job '" + id + "'");
    return {200, status->to_json()};
}

ApiResponse Service::list_jobs() const {
    ApiResponse r;
    r.body = nlohmann::ordered_json::array();
    for (const auto& s : jobs_->list()) r.body.push_back(s.to_json());
    return r;
}

ApiResponse Service::answer(const json& body) const {
    if (!body.is_object()) return error_response(422, "body must be a JSON object");
    for (const auto& [key, value] : body.items()) {
        if (key != "question" && key != "n" && key != "strategy") return error_response(422, "unknown field '" + key + "'");
    }
    if (!body.contains("question") || !body["question"].is_string() || trim(body["question"].get<std::string>()).empty()) {
        return error_response(422, "'question' must be a non-empty string");
    }
    std::optional<std::size_t> n;
    if (body.contains("n")) {
        if (!body["n"].is_number_unsigned() || body["n"].get<std::size_t>() == 0) {
            return error_response(422, "'n' must be a positive integer");
        }
        n = body["n"].get<std::size_t>();
    }
    auto request = answer_request_from_config(config_, body["question"].get<std::string>(), n);
    if (body.contains("strategy")) {
        try {
            request.strategy_override = parse_strategy(body["strategy"].get<std::string>());
        } catch (const std::exception& e) {
            return error_response(422, e.what());
        }
    }
    const auto current = retriever();
    if (!current) return error_response(503, "no corpus has been indexed yet");
    try {
        return {200, answer_to_json(synthesize(request, *current, *models_.generator))};
    } catch (const Error& e) {
        return error_response(status_for(e), e.what());
    }
}

ApiResponse Service::strategy() const {
    const auto path = config_.corpus_dir() / kStrategyFile;
    if (!fs::exists(path)) return error_response(404, "no strategy has been chosen yet");
    try {
        return {200, StrategyReport::load(path).to_json()};
    } catch (const Error& e) {
        return error_response(500, e.what());
    }
}

ApiResponse Service::config() const { return {200, redacted_config(config_)}; }

void Service::install_routes() {
    auto& server = impl_->server;
    server.new_task_queue = [] { return new httplib::ThreadPool(16); };

    auto send = [](httplib::Response& res, const ApiResponse& r) {
        res.status = r.status;
        res.set_content(r.body.dump(), "application/json");
    };
    auto parse_body = [](const httplib::Request& req) { return json::parse(req.body, nullptr, false); };

    server.Post("/api/jobs", [this, send, parse_body](const httplib::Request& req, httplib::Response& res) {
        const auto body = parse_body(req);
        send(res, body.is_discarded() ? error_response(422, "body is not valid JSON") : submit_job(body));
    });
    server.Get("/api/jobs", [this, send](const httplib::Request&, httplib::Response& res) { send(res, list_jobs()); });
    server.Get(R"(/api/jobs/([A-Za-z0-9_-]+))", [this, send](const httplib::Request& req, httplib::Response& res) {
        send(res, job_status(req.matches[1]));
    });
    server.Get(R"(/api/jobs/([A-Za-z0-9_-]+)/result)", [this, send](const httplib::Request& req, httplib::Response& res) {
        const auto status = jobs_->get(req.matches[1]);
        if (!status) return send(res, error_response(404, "unknown job"));
        if (status->state != JobState::succeeded || !status->result_path ||
            fs::path(*status->result_path).extension() != ".json" || !fs::is_regular_file(*status->result_path)) {
            return send(res, error_response(404, "job has no JSON result"));
        }
        res.status = 200;
        res.set_content(read_text_file(*status->result_path), "application/json");
    });
    server.Post("/api/answer", [this, send, parse_body](const httplib::Request& req, httplib::Response& res) {
        const auto body = parse_body(req);
        send(res, body.is_discarded() ? error_response(422, "body is not valid JSON") : answer(body));
    });
    server.Get("/api/strategy", [this, send](const httplib::Request&, httplib::Response& res) { send(res, strategy()); });
    server.Get("/api/config", [this, send](const httplib::Request&, httplib::Response& res) { send(res, config()); });
    server.set_exception_handler([this](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
        std::string message = "internal error";
        try {
            std::rethrow_exception(ep);
        } catch (const std::exception& e) {
            message = e.what();
        } catch (...) {
        }
        res.status = 500;
        res.set_content(nlohmann::ordered_json{{"error", scrub_secrets(config_, message)}}.dump(), "application/json");
    });
    if (config_.server.static_dir) {
        if (!server.set_mount_point("/", config_.server.static_dir->string())) {
            log_.warn("static directory " + config_.server.static_dir->string() + " does not exist; not serving the UI");
        }
    }
}

int Service::start() {
    auto& server = impl_->server;
    const auto& s = config_.server;
    if (s.port == 0) {
        port_ = server.bind_to_any_port(s.host);
    } else {
        port_ = server.bind_to_port(s.host, s.port) ? s.port : -1;
    }
    if (port_ <= 0) fail(ErrorCode::IoError, "cannot bind " + s.host + ":" + std::to_string(s.port));
    thread_ = std::thread([this] { impl_->server.listen_after_bind(); });
    server.wait_until_ready();
    log_.info("serving on http://" + s.host + ":" + std::to_string(port_));
    return port_;
}

void Service::stop() {
    impl_->server.stop();
    if (thread_.joinable()) thread_.join();
}

} // namespace ragkit

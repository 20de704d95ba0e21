/**
 * @file config.cpp
 * @brief Strict configuration parsing.
 */
#include "ragkit/config.hpp"

#include "ragkit/error.hpp"
#include "ragkit/jsonl.hpp"

#include <cstdlib>
#include <initializer_list>
#include <set>

namespace ragkit {

namespace {

using nlohmann::json;

void require_object(const json& j, const std::string& where) {
    if (!j.is_object()) fail(ErrorCode::ConfigError, where + " must be an object");
}

void reject_unknown(const json& j, const std::string& where, std::initializer_list<std::string_view> allowed) {
    require_object(j, where);
    for (const auto& [key, value] : j.items()) {
        bool known = false;
        for (const auto a : allowed) known = known || a == key;
        if (!known) fail(ErrorCode::ConfigError, "unknown key '" + key + "' in " + where);
    }
}

template <typename T>
void read_opt(const json& j, const char* key, T& out, const std::string& where) {
    if (!j.contains(key) || j.at(key).is_null()) return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception&) {
        fail(ErrorCode::ConfigError, where + "." + key + " has the wrong type");
    }
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
    const std::filesystem::path path(p);
    return path.is_absolute() ? path : (base / path).lexically_normal();
}

EndpointConfig parse_endpoint(const json& j, const std::string& where) {
    reject_unknown(j, where, {"base_url", "model", "api_key_env", "timeout_s", "max_concurrency", "retry", "batch_limit"});
    EndpointConfig e;
    read_opt(j, "base_url", e.base_url, where);
    read_opt(j, "model", e.model_name, where);
    read_opt(j, "api_key_env", e.api_key_env, where);
    read_opt(j, "timeout_s", e.timeout_s, where);
    read_opt(j, "max_concurrency", e.max_concurrency, where);
    read_opt(j, "batch_limit", e.batch_limit, where);
    if (j.contains("retry")) {
        const auto& r = j.at("retry");
        reject_unknown(r, where + ".retry", {"max_attempts", "base_backoff_s"});
        read_opt(r, "max_attempts", e.retry.max_attempts, where + ".retry");
        read_opt(r, "base_backoff_s", e.retry.base_backoff_s, where + ".retry");
    }
    try {
        e.validate();
    } catch (const Error& err) {
        fail(ErrorCode::ConfigError, where + ": " + err.what());
    }
    return e;
}

} // namespace

PipelineConfig parse_config(const json& doc, const std::filesystem::path& base_dir) {
    reject_unknown(doc, "config", {"workspace", "corpus", "chunking", "endpoints", "datagen", "retrieval", "answer", "server"});
    PipelineConfig c;
    c.snapshot = nlohmann::ordered_json::parse(doc.dump());

    std::string workspace = "workspace";
    read_opt(doc, "workspace", workspace, "config");
    c.workspace = resolve(base_dir, workspace);

    if (doc.contains("corpus")) {
        const auto& j = doc.at("corpus");
        reject_unknown(j, "corpus", {"manifest"});
        std::string manifest;
        read_opt(j, "manifest", manifest, "corpus");
        if (!manifest.empty()) c.corpus_manifest = resolve(base_dir, manifest);
    }
    if (doc.contains("chunking")) {
        const auto& j = doc.at("chunking");
        reject_unknown(j, "chunking", {"target_chars", "max_chars", "overlap_budget"});
        read_opt(j, "target_chars", c.chunking.target_chars, "chunking");
        read_opt(j, "max_chars", c.chunking.max_chars, "chunking");
        read_opt(j, "overlap_budget", c.chunking.overlap_budget, "chunking");
        try {
            c.chunking.validate();
        } catch (const Error& e) {
            fail(ErrorCode::ConfigError, std::string("chunking: ") + e.what());
        }
    }
    if (!doc.contains("endpoints")) fail(ErrorCode::ConfigError, "missing 'endpoints'");
    {
        const auto& j = doc.at("endpoints");
        reject_unknown(j, "endpoints", {"embedding", "generator", "judge"});
        if (!j.contains("embedding") || !j.contains("generator")) {
            fail(ErrorCode::ConfigError, "endpoints.embedding and endpoints.generator are required");
        }
        c.embedding = parse_endpoint(j.at("embedding"), "endpoints.embedding");
        c.generator = parse_endpoint(j.at("generator"), "endpoints.generator");
        if (j.contains("judge") && !j.at("judge").is_null()) c.judge = parse_endpoint(j.at("judge"), "endpoints.judge");
    }
    if (doc.contains("datagen")) {
        const auto& j = doc.at("datagen");
        reject_unknown(j, "datagen", {"n_simple", "n_complex", "pool_k", "n_expanded", "batch_size", "seed"});
        read_opt(j, "n_simple", c.datagen.n_simple, "datagen");
        read_opt(j, "n_complex", c.datagen.n_complex, "datagen");
        read_opt(j, "pool_k", c.datagen.pool_k, "datagen");
        read_opt(j, "n_expanded", c.datagen.n_expanded, "datagen");
        read_opt(j, "batch_size", c.datagen.batch_size, "datagen");
        read_opt(j, "seed", c.datagen.seed, "datagen");
        if (c.datagen.pool_k < 1) fail(ErrorCode::ConfigError, "datagen.pool_k must be >= 1");
        if (c.datagen.n_expanded < 1) fail(ErrorCode::ConfigError, "datagen.n_expanded must be >= 1");
        if (c.datagen.batch_size < 2) fail(ErrorCode::ConfigError, "datagen.batch_size must be >= 2");
    }
    if (doc.contains("retrieval")) {
        const auto& j = doc.at("retrieval");
        reject_unknown(j, "retrieval", {"k1", "b", "rrf_k", "fuse_depth", "k_eval", "validation", "strategy"});
        read_opt(j, "k1", c.retrieval.bm25.k1, "retrieval");
        read_opt(j, "b", c.retrieval.bm25.b, "retrieval");
        read_opt(j, "rrf_k", c.retrieval.rrf_k, "retrieval");
        read_opt(j, "fuse_depth", c.retrieval.fuse_depth, "retrieval");
        if (j.contains("k_eval") && !j.at("k_eval").is_null()) {
            std::size_t k = 0;
            read_opt(j, "k_eval", k, "retrieval");
            if (k < 1) fail(ErrorCode::ConfigError, "retrieval.k_eval must be >= 1");
            c.retrieval.k_eval = k;
        }
        std::string validation;
        read_opt(j, "validation", validation, "retrieval");
        if (!validation.empty()) c.retrieval.validation_path = resolve(base_dir, validation);
        std::string strategy;
        read_opt(j, "strategy", strategy, "retrieval");
        if (!strategy.empty()) {
            try {
                c.retrieval.strategy = parse_strategy(strategy);
            } catch (const Error& e) {
                fail(ErrorCode::ConfigError, e.what());
            }
        }
        if (!(c.retrieval.rrf_k > 0)) fail(ErrorCode::ConfigError, "retrieval.rrf_k must be > 0");
        if (c.retrieval.fuse_depth < 1) fail(ErrorCode::ConfigError, "retrieval.fuse_depth must be >= 1");
        if (c.retrieval.bm25.k1 < 0 || c.retrieval.bm25.b < 0 || c.retrieval.bm25.b > 1) {
            fail(ErrorCode::ConfigError, "retrieval.k1 must be >= 0 and retrieval.b in [0, 1]");
        }
    }
    if (doc.contains("answer")) {
        const auto& j = doc.at("answer");
        reject_unknown(j, "answer", {"n_contexts", "max_tokens", "temperature"});
        read_opt(j, "n_contexts", c.answer.n_contexts, "answer");
        read_opt(j, "max_tokens", c.answer.max_tokens, "answer");
        read_opt(j, "temperature", c.answer.temperature, "answer");
        if (c.answer.n_contexts < 1) fail(ErrorCode::ConfigError, "answer.n_contexts must be >= 1");
        if (c.answer.max_tokens < 1) fail(ErrorCode::ConfigError, "answer.max_tokens must be >= 1");
        if (c.answer.temperature < 0) fail(ErrorCode::ConfigError, "answer.temperature must be >= 0");
    }
    if (doc.contains("server")) {
        const auto& j = doc.at("server");
        reject_unknown(j, "server", {"host", "port", "static_dir"});
        read_opt(j, "host", c.server.host, "server");
        read_opt(j, "port", c.server.port, "server");
        std::string static_dir;
        read_opt(j, "static_dir", static_dir, "server");
        if (!static_dir.empty()) c.server.static_dir = resolve(base_dir, static_dir);
        if (c.server.port < 0 || c.server.port > 65535) fail(ErrorCode::ConfigError, "server.port out of range");
    }
    return c;
}

PipelineConfig load_config(const std::filesystem::path& path) {
    json doc;
    try {
        doc = read_json_file(path);
    } catch (const Error& e) {
        fail(ErrorCode::ConfigError, e.what());
    }
    return parse_config(doc, std::filesystem::absolute(path).parent_path());
}

nlohmann::ordered_json redacted_config(const PipelineConfig& config) {
    static const std::set<std::string> secret_keys{"api_key", "key", "token", "password", "secret", "authorization"};
    nlohmann::ordered_json out = config.snapshot;
    std::function<void(nlohmann::ordered_json&)> scrub = [&](nlohmann::ordered_json& j) {
        if (j.is_object()) {
            for (auto it = j.begin(); it != j.end(); ++it) {
                if (secret_keys.count(it.key()) != 0U) {
                    it.value() = "<redacted>";
                } else {
                    scrub(it.value());
                }
            }
        } else if (j.is_array()) {
            for (auto& v : j) scrub(v);
        }
    };
    scrub(out);
    return out;
}

std::string scrub_secrets(const PipelineConfig& config, std::string text) {
    std::vector<const EndpointConfig*> endpoints{&config.embedding, &config.generator};
    if (config.judge) endpoints.push_back(&*config.judge);
    for (const auto* e : endpoints) {
        if (e->api_key_env.empty()) continue;
        const char* value = std::getenv(e->api_key_env.c_str());
        if (value == nullptr || std::string_view(value).size() < 4) continue;
        const std::string key(value);
        for (auto pos = text.find(key); pos != std::string::npos; pos = text.find(key, pos)) {
            text.replace(pos, key.size(), "<redacted>");
        }
    }
    return text;
}

} // namespace ragkit

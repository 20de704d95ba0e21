/**
 * @file gateway.cpp
 * @brief JSON-over-HTTP client with bounded concurrency and exponential backoff.
 */
#include "ragkit/gateway.hpp"

#include "ragkit/error.hpp"
#include "ragkit/parallel.hpp"
#include "ragkit/prompts.hpp"
#include "ragkit/text.hpp"

#include <httplib.h>
#include <nlohmann/json.hpp>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <thread>

namespace ragkit {

namespace {

constexpr double kJitterFraction = 0.1;

struct AttemptResult {
    bool ok = false;
    bool retryable = false;
    bool rate_limited = false;
    std::string body;
    std::string error;
};

std::pair<std::string, std::string> split_base_url(const std::string& url) {
    const auto scheme_end = url.find("://");
    const std::size_t host_start = scheme_end == std::string::npos ? 0 : scheme_end + 3;
    const auto path_start = url.find('/', host_start);
    if (path_start == std::string::npos) return {url, ""};
    std::string prefix = url.substr(path_start);
    while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
    return {url.substr(0, path_start), prefix};
}

std::string api_key_from_env(const std::string& var) {
    if (var.empty()) return {};
    const char* value = std::getenv(var.c_str());
    return value == nullptr ? std::string() : std::string(value);
}

} // namespace

void EndpointConfig::validate() const {
    if (base_url.empty()) fail(ErrorCode::ConfigError, "endpoint base_url is empty");
    const bool http = base_url.starts_with("http://");
    const bool https = base_url.starts_with("https://");
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
    if (https) fail(ErrorCode::ConfigError, "https endpoints need a build with RAGKIT_WITH_TLS");
#endif
    if (!http && !https) fail(ErrorCode::ConfigError, "endpoint base_url must start with http:// or https://");
    if (model_name.empty()) fail(ErrorCode::ConfigError, "endpoint model_name is empty");
    if (!(timeout_s > 0)) fail(ErrorCode::ConfigError, "endpoint timeout must be > 0");
    if (max_concurrency < 1) fail(ErrorCode::ConfigError, "endpoint max_concurrency must be >= 1");
    if (retry.max_attempts < 1) fail(ErrorCode::ConfigError, "retry.max_attempts must be >= 1");
    if (retry.base_backoff_s < 0) fail(ErrorCode::ConfigError, "retry.base_backoff must be >= 0");
    if (batch_limit < 1) fail(ErrorCode::ConfigError, "batch_limit must be >= 1");
}

HttpGateway::HttpGateway(EndpointConfig config, std::uint64_t jitter_seed)
    : config_(std::move(config)), slots_(config_.max_concurrency), jitter_rng_(jitter_seed) {
    config_.validate();
    std::tie(scheme_host_port_, path_prefix_) = split_base_url(config_.base_url);
}

double HttpGateway::backoff_delay(int attempt) {
    const double base = config_.retry.base_backoff_s * std::ldexp(1.0, attempt - 1);
    double unit = 0.0;
    {
        std::lock_guard lock(jitter_mutex_);
        unit = std::uniform_real_distribution<double>(-1.0, 1.0)(jitter_rng_);
    }
    return std::max(0.0, base * (1.0 + kJitterFraction * unit));
}

std::string HttpGateway::post_json(std::string_view route, const std::string& body) {
    const std::string path = path_prefix_ + std::string(route);
    const std::string key = api_key_from_env(config_.api_key_env);
    const auto timeout = std::chrono::duration_cast<std::chrono::microseconds>(std::chrono::duration<double>(config_.timeout_s));
    const auto secs = static_cast<time_t>(timeout.count() / 1000000);
    const auto usecs = static_cast<time_t>(timeout.count() % 1000000);

    AttemptResult last;
    for (int attempt = 1; attempt <= config_.retry.max_attempts; ++attempt) {
        last = AttemptResult{};
        {
            slots_.acquire();
            struct Release {
                std::counting_semaphore<4096>& s;
                ~Release() { s.release(); }
            } release{slots_};

            httplib::Client client(scheme_host_port_);
            client.set_connection_timeout(secs, usecs);
            client.set_read_timeout(secs, usecs);
            client.set_write_timeout(secs, usecs);
            httplib::Headers headers;
            if (!key.empty()) headers.emplace("Authorization", "Bearer " + key);
            const auto res = client.Post(path, headers, body, "application/json");
            if (!res) {
                last.retryable = true;
                last.error = "request to " + scheme_host_port_ + path + " failed: " + httplib::to_string(res.error());
            } else if (res->status >= 200 && res->status < 300) {
                last.ok = true;
                last.body = res->body;
            } else {
                last.rate_limited = res->status == 429;
                last.retryable = res->status == 429 || res->status == 408 || res->status >= 500;
                last.error = scheme_host_port_ + path + " returned HTTP " + std::to_string(res->status);
            }
        }
        if (last.ok) return std::move(last.body);
        if (!last.retryable || attempt == config_.retry.max_attempts) break;
        const double delay = backoff_delay(attempt);
        if (observer_) observer_(attempt, delay);
        std::this_thread::sleep_for(std::chrono::duration<double>(delay));
    }
    if (last.rate_limited) fail(ErrorCode::RateLimited, last.error);
    fail(ErrorCode::TransportError, last.error);
}

std::vector<Embedding> HttpGateway::embed_batch(const std::vector<std::string>& texts) {
    if (texts.empty()) return {};
    if (texts.size() > config_.batch_limit) {
        fail(ErrorCode::InvalidArgument, "embedding batch of " + std::to_string(texts.size()) + " exceeds limit " +
                                             std::to_string(config_.batch_limit));
    }
    const nlohmann::json request{{"model", config_.model_name}, {"input", texts}};
    const std::string body = post_json("/v1/embeddings", request.dump());

    std::vector<Embedding> out;
    try {
        const auto response = nlohmann::json::parse(body);
        const auto& data = response.at("data");
        if (!data.is_array() || data.size() != texts.size()) {
            fail(ErrorCode::DimsInconsistent, "endpoint returned " + std::to_string(data.size()) + " embeddings for " +
                                                  std::to_string(texts.size()) + " inputs");
        }
        out.resize(texts.size());
        std::vector<bool> seen(texts.size(), false);
        for (std::size_t i = 0; i < data.size(); ++i) {
            const auto& item = data[i];
            const std::size_t index = item.contains("index") ? item.at("index").get<std::size_t>() : i;
            if (index >= texts.size() || seen[index]) fail(ErrorCode::DimsInconsistent, "bad embedding index");
            seen[index] = true;
            out[index] = item.at("embedding").get<Embedding>();
        }
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::TransportError, std::string("malformed embeddings response: ") + e.what());
    }
    for (const auto& v : out) {
        if (v.empty() || v.size() != out.front().size()) fail(ErrorCode::DimsInconsistent, "embeddings differ in dims");
    }
    return out;
}

std::vector<Embedding> HttpGateway::embed_all(const std::vector<std::string>& texts) {
    const std::size_t limit = config_.batch_limit;
    const std::size_t batches = (texts.size() + limit - 1) / limit;
    std::vector<std::vector<Embedding>> parts(batches);
    parallel_for(batches, static_cast<std::size_t>(config_.max_concurrency), [&](std::size_t b) {
        const auto first = texts.begin() + static_cast<std::ptrdiff_t>(b * limit);
        const auto last = texts.begin() + static_cast<std::ptrdiff_t>(std::min(texts.size(), (b + 1) * limit));
        parts[b] = embed_batch(std::vector<std::string>(first, last));
    });
    std::vector<Embedding> out;
    out.reserve(texts.size());
    for (auto& part : parts) {
        for (auto& v : part) {
            if (!out.empty() && v.size() != out.front().size()) fail(ErrorCode::DimsInconsistent, "embeddings differ in dims");
            out.push_back(std::move(v));
        }
    }
    return out;
}

std::string HttpGateway::generate(const ChatRequest& request) {
    if (request.user.empty()) fail(ErrorCode::InvalidArgument, "chat request has empty user message");
    if (request.temperature < 0) fail(ErrorCode::InvalidArgument, "temperature must be >= 0");
    if (request.max_tokens <= 0) fail(ErrorCode::InvalidArgument, "max_tokens must be > 0");
    nlohmann::json messages = nlohmann::json::array();
    if (request.system) messages.push_back({{"role", "system"}, {"content", *request.system}});
    messages.push_back({{"role", "user"}, {"content", request.user}});
    nlohmann::json payload{{"model", config_.model_name},
                           {"messages", messages},
                           {"temperature", request.temperature},
                           {"max_tokens", request.max_tokens}};
    if (request.seed) payload["seed"] = *request.seed;
    const std::string body = post_json("/v1/chat/completions", payload.dump());

    std::string content;
    try {
        const auto response = nlohmann::json::parse(body);
        const auto& choices = response.at("choices");
        if (choices.empty()) fail(ErrorCode::EmptyCompletion, "no choices in completion");
        const auto& message = choices.at(0).at("message");
        if (message.contains("content") && message.at("content").is_string()) content = message.at("content").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::TransportError, std::string("malformed completion response: ") + e.what());
    }
    if (content.empty()) fail(ErrorCode::EmptyCompletion, "completion text is empty");
    return content;
}

std::vector<Embedding> embed_in_batches(Embedder& embedder, const std::vector<std::string>& texts,
                                        std::size_t batch_limit) {
    if (auto* http = dynamic_cast<HttpGateway*>(&embedder)) return http->embed_all(texts);
    batch_limit = std::max<std::size_t>(batch_limit, 1);
    std::vector<Embedding> out;
    out.reserve(texts.size());
    for (std::size_t start = 0; start < texts.size(); start += batch_limit) {
        const auto first = texts.begin() + static_cast<std::ptrdiff_t>(start);
        const auto last = texts.begin() + static_cast<std::ptrdiff_t>(std::min(texts.size(), start + batch_limit));
        auto part = embedder.embed_batch(std::vector<std::string>(first, last));
        if (part.size() != static_cast<std::size_t>(last - first)) {
            fail(ErrorCode::DimsInconsistent, "embedder returned the wrong number of vectors");
        }
        for (auto& v : part) out.push_back(std::move(v));
    }
    return out;
}

std::string_view verdict_name(Verdict v) noexcept {
    switch (v) {
    case Verdict::True: return "true";
    case Verdict::False: return "false";
    case Verdict::Invalid: return "invalid";
    }
    return "invalid";
}

std::string render_judge_prompt(std::string_view query, std::string_view gold, std::string_view generated) {
    if (query.empty() || gold.empty() || generated.empty()) {
        fail(ErrorCode::InvalidArgument, "judge prompt inputs must be non-empty");
    }
    return prompts::render(prompts::judge().text,
                           {{"query", query}, {"ground truth answer", gold}, {"generated answer", generated}});
}

JudgeVerdict parse_verdict(std::string raw) {
    const std::string folded = to_upper_ascii(trim(raw));
    JudgeVerdict v;
    if (folded == "TRUE") {
        v.verdict = Verdict::True;
    } else if (folded == "FALSE") {
        v.verdict = Verdict::False;
    }
    v.raw = std::move(raw);
    return v;
}

JudgeVerdict judge(std::string_view query, std::string_view gold, std::string_view generated, ChatModel& judge_model) {
    ChatRequest request;
    request.user = render_judge_prompt(query, gold, generated);
    request.temperature = 0.0;
    request.max_tokens = 16;
    return parse_verdict(judge_model.generate(request));
}

} // namespace ragkit

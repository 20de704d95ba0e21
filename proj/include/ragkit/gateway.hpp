/**
 * @file gateway.hpp
 * @brief Clients for OpenAI-compatible embedding and chat-completion endpoints,
 *        plus the answer-judgment prompt and verdict mapping.
 */
#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <string>
#include <string_view>
#include <vector>

#include "ragkit/rng.hpp"

namespace ragkit {

struct RetryPolicy {
    int max_attempts = 3;
    double base_backoff_s = 0.5;
};

struct EndpointConfig {
    std::string base_url;
    std::string model_name;
    std::string api_key_env; ///< name of the environment variable holding the key; may be empty
    double timeout_s = 60.0;
    int max_concurrency = 4;
    RetryPolicy retry;
    std::size_t batch_limit = 64; ///< embedding inputs per request

    void validate() const;
};

struct ChatRequest {
    std::optional<std::string> system;
    std::string user;
    double temperature = 0.0;
    int max_tokens = 512;
    std::optional<std::int64_t> seed;
};

using Embedding = std::vector<float>;

class Embedder {
public:
    virtual ~Embedder() = default;
    /// One vector per input, order preserved, uniform dims.
    virtual std::vector<Embedding> embed_batch(const std::vector<std::string>& texts) = 0;
    virtual std::string model_id() const = 0;
};

class ChatModel {
public:
    virtual ~ChatModel() = default;
    /// Completion text, verbatim.
    virtual std::string generate(const ChatRequest& request) = 0;
};

/// Called before each backoff sleep with the attempt that just failed (1-based)
/// and the delay in seconds.
using RetryObserver = std::function<void(int attempt, double delay_s)>;

/// Blocking, thread-safe client for one endpoint. In-flight requests never
/// exceed EndpointConfig::max_concurrency.
class HttpGateway final : public Embedder, public ChatModel {
public:
    explicit HttpGateway(EndpointConfig config, std::uint64_t jitter_seed = 0x5EEDULL);

    std::vector<Embedding> embed_batch(const std::vector<std::string>& texts) override;
    std::string generate(const ChatRequest& request) override;
    std::string model_id() const override { return config_.model_name; }

    /// Splits `texts` into batch_limit-sized requests issued concurrently.
    std::vector<Embedding> embed_all(const std::vector<std::string>& texts);

    const EndpointConfig& config() const noexcept { return config_; }
    void set_retry_observer(RetryObserver observer) { observer_ = std::move(observer); }

private:
    struct Response;
    std::string post_json(std::string_view route, const std::string& body);
    double backoff_delay(int attempt);

    EndpointConfig config_;
    std::string scheme_host_port_;
    std::string path_prefix_;
    std::counting_semaphore<4096> slots_;
    std::mutex jitter_mutex_;
    Rng jitter_rng_;
    RetryObserver observer_;
};

/// Embeds texts with any embedder, splitting into requests of at most `batch_limit`.
std::vector<Embedding> embed_in_batches(Embedder& embedder, const std::vector<std::string>& texts,
                                        std::size_t batch_limit);

enum class Verdict { True, False, Invalid };

std::string_view verdict_name(Verdict v) noexcept;

struct JudgeVerdict {
    Verdict verdict = Verdict::Invalid;
    std::string raw;
};

/// The answer-judgment prompt with the three placeholders filled in.
std::string render_judge_prompt(std::string_view query, std::string_view gold, std::string_view generated);

/// Trimmed, uppercased reply "TRUE" or "FALSE"; everything else is Invalid.
JudgeVerdict parse_verdict(std::string raw);

/// Renders the judge prompt and asks `judge_model` at temperature 0.
JudgeVerdict judge(std::string_view query, std::string_view gold, std::string_view generated, ChatModel& judge_model);

} // namespace ragkit

/**
 * @file service.hpp
 * @brief HTTP service exposing jobs, answers, the chosen strategy and the config under /api/.
 */
#pragma once

#include "ragkit/config.hpp"
#include "ragkit/jobs.hpp"
#include "ragkit/logging.hpp"
#include "ragkit/pipeline.hpp"

#include <nlohmann/json.hpp>

#include <memory>
#include <mutex>
#include <thread>

namespace ragkit {

/// Status code and JSON body of one API call; lets tests bypass the socket.
struct ApiResponse {
    int status = 200;
    nlohmann::ordered_json body;
};

class Service {
public:
    Service(PipelineConfig config, ModelClients models, Logger log = Logger::stderr_logger());
    ~Service();
    Service(const Service&) = delete;
    Service& operator=(const Service&) = delete;

    /// Binds config.server.host:port (port 0 picks a free one) and serves in the background.
    int start();
    void stop();
    int port() const noexcept { return port_; }

    JobRegistry& jobs() noexcept { return *jobs_; }

    /// Loads the on-disk corpus and strategy and swaps them in; clears them if absent.
    void reload_corpus();
    std::shared_ptr<Retriever> retriever() const;

    ApiResponse submit_job(const nlohmann::json& body);
    ApiResponse job_status(const std::string& id) const;
    ApiResponse list_jobs() const;
    ApiResponse answer(const nlohmann::json& body) const;
    ApiResponse strategy() const;
    ApiResponse config() const;

private:
    struct Impl;

    void install_routes();
    std::string run_job(JobKind kind, const nlohmann::json& params, JobHandle& handle);
    ApiResponse error_response(int status, const std::string& message) const;

    PipelineConfig config_;
    ModelClients models_;
    Logger log_;
    std::unique_ptr<JobRegistry> jobs_;
    std::unique_ptr<Impl> impl_;
    mutable std::mutex retriever_mutex_;
    std::shared_ptr<Retriever> retriever_;
    int port_ = 0;
    std::thread thread_;
};

} // namespace ragkit

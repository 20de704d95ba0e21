/**
 * @file jobs.hpp
 * @brief Background job registry with a JSONL journal.
 */
#pragma once

#include <nlohmann/json.hpp>

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace ragkit {

enum class JobKind { ingest, datagen, index, eval_retrieval, eval_answers, export_ft };
enum class JobState { queued, running, succeeded, failed };

std::string_view job_kind_name(JobKind kind) noexcept;
/// Throws InvalidArgument for unknown names.
JobKind parse_job_kind(std::string_view name);
std::string_view job_state_name(JobState state) noexcept;

inline constexpr std::size_t kJobLogLines = 200;

struct JobStatus {
    std::string id;
    JobKind kind = JobKind::ingest;
    JobState state = JobState::queued;
    double progress = 0.0;
    std::deque<std::string> log_tail;
    std::optional<std::string> result_path;
    std::optional<std::string> error;
    nlohmann::json params = nlohmann::json::object();
    std::string created_at;
    std::optional<std::string> finished_at;

    nlohmann::ordered_json to_json() const;
    static JobStatus from_json(const nlohmann::json& j);
};

/// Handed to a running job for progress and log reporting.
class JobHandle {
public:
    virtual ~JobHandle() = default;
    /// Clamped to [0, 1]; never decreases.
    virtual void progress(double fraction) = 0;
    virtual void log(const std::string& line) = 0;
};

/// Returns the result path (may be empty).
using JobRunner = std::function<std::string(const nlohmann::json& params, JobHandle& handle)>;

class JobConflict : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class JobRegistry {
public:
    /// Replays `journal` if it exists; jobs left queued or running are marked failed.
    explicit JobRegistry(std::optional<std::filesystem::path> journal = std::nullopt);
    ~JobRegistry();
    JobRegistry(const JobRegistry&) = delete;
    JobRegistry& operator=(const JobRegistry&) = delete;

    /// Throws JobConflict when a job of the same kind is queued or running.
    std::string submit(JobKind kind, nlohmann::json params, JobRunner runner);

    std::optional<JobStatus> get(const std::string& id) const;
    /// Creation order.
    std::vector<JobStatus> list() const;

    /// Blocks until the job is no longer queued or running.
    void wait(const std::string& id) const;
    void wait_all() const;

private:
    class Handle;

    void run(const std::string& id, JobRunner runner);
    void journal_locked(const JobStatus& s);
    void update(const std::string& id, const std::function<void(JobStatus&)>& fn, bool journal);

    std::optional<std::filesystem::path> journal_;
    mutable std::mutex mutex_;
    mutable std::condition_variable changed_;
    std::map<std::string, JobStatus> jobs_;
    std::vector<std::string> order_;
    std::uint64_t next_id_ = 1;
    std::vector<std::thread> threads_;
};

} // namespace ragkit

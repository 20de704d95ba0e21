/**
 * @file jobs.cpp
 * @brief Job registry.
 */
#include "ragkit/jobs.hpp"

#include "ragkit/corpus.hpp"
#include "ragkit/error.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

namespace ragkit {

namespace {

constexpr std::pair<JobKind, std::string_view> kKindNames[] = {
    {JobKind::ingest, "ingest"},
    {JobKind::datagen, "datagen"},
    {JobKind::index, "index"},
    {JobKind::eval_retrieval, "eval_retrieval"},
    {JobKind::eval_answers, "eval_answers"},
    {JobKind::export_ft, "export_ft"},
};

JobState parse_job_state(std::string_view name) {
    for (auto s : {JobState::queued, JobState::running, JobState::succeeded, JobState::failed}) {
        if (job_state_name(s) == name) return s;
    }
    fail(ErrorCode::SchemaError, "unknown job state '" + std::string(name) + "'");
}

bool is_active(JobState s) { return s == JobState::queued || s == JobState::running; }

} // namespace

std::string_view job_kind_name(JobKind kind) noexcept {
    for (const auto& [k, name] : kKindNames) {
        if (k == kind) return name;
    }
    return "unknown";
}

JobKind parse_job_kind(std::string_view name) {
    for (const auto& [k, n] : kKindNames) {
        if (n == name) return k;
    }
    fail(ErrorCode::InvalidArgument, "unknown job kind '" + std::string(name) + "'");
}

std::string_view job_state_name(JobState state) noexcept {
    switch (state) {
    case JobState::queued: return "queued";
    case JobState::running: return "running";
    case JobState::succeeded: return "succeeded";
    case JobState::failed: return "failed";
    }
    return "unknown";
}

nlohmann::ordered_json JobStatus::to_json() const {
    nlohmann::ordered_json j;
    j["job_id"] = id;
    j["kind"] = job_kind_name(kind);
    j["state"] = job_state_name(state);
    j["progress"] = progress;
    j["log_tail"] = std::vector<std::string>(log_tail.begin(), log_tail.end());
    j["result_path"] = result_path ? nlohmann::ordered_json(*result_path) : nlohmann::ordered_json();
    j["error"] = error ? nlohmann::ordered_json(*error) : nlohmann::ordered_json();
    j["params"] = params;
    j["created_at"] = created_at;
    j["finished_at"] = finished_at ? nlohmann::ordered_json(*finished_at) : nlohmann::ordered_json();
    return j;
}

JobStatus JobStatus::from_json(const nlohmann::json& j) {
    JobStatus s;
    try {
        s.id = j.at("job_id").get<std::string>();
        s.kind = parse_job_kind(j.at("kind").get<std::string>());
        s.state = parse_job_state(j.at("state").get<std::string>());
        s.progress = j.value("progress", 0.0);
        for (const auto& line : j.value("log_tail", std::vector<std::string>{})) s.log_tail.push_back(line);
        if (j.contains("result_path") && j["result_path"].is_string()) s.result_path = j["result_path"].get<std::string>();
        if (j.contains("error") && j["error"].is_string()) s.error = j["error"].get<std::string>();
        if (j.contains("params")) s.params = j["params"];
        s.created_at = j.value("created_at", std::string());
        if (j.contains("finished_at") && j["finished_at"].is_string()) s.finished_at = j["finished_at"].get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::SchemaError, std::string("job record: ") + e.what());
    } catch (const Error& e) {
        fail(ErrorCode::SchemaError, std::string("job record: ") + e.what());
    }
    return s;
}

class JobRegistry::Handle final : public JobHandle {
public:
    Handle(JobRegistry& registry, std::string id) : registry_(registry), id_(std::move(id)) {}

    void progress(double fraction) override {
        const double f = std::clamp(fraction, 0.0, 1.0);
        registry_.update(id_, [f](JobStatus& s) { s.progress = std::max(s.progress, f); }, false);
    }

    void log(const std::string& line) override {
        registry_.update(id_, [&line](JobStatus& s) {
            s.log_tail.push_back(line);
            while (s.log_tail.size() > kJobLogLines) s.log_tail.pop_front();
        }, false);
    }

private:
    JobRegistry& registry_;
    std::string id_;
};

JobRegistry::JobRegistry(std::optional<std::filesystem::path> journal) : journal_(std::move(journal)) {
    if (!journal_ || !std::filesystem::exists(*journal_)) return;
    std::ifstream in(*journal_);
    std::string line;
    std::vector<std::string> interrupted;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        JobStatus s;
        try {
            s = JobStatus::from_json(nlohmann::json::parse(line));
        } catch (const std::exception&) {
            continue; // a torn final line from a crash
        }
        if (!jobs_.count(s.id)) order_.push_back(s.id);
        const auto numeric = s.id.rfind('-');
        if (numeric != std::string::npos) {
            try {
                next_id_ = std::max<std::uint64_t>(next_id_, std::stoull(s.id.substr(numeric + 1)) + 1);
            } catch (const std::exception&) {
            }
        }
        jobs_[s.id] = std::move(s);
    }
    std::lock_guard lock(mutex_);
    for (auto& [id, s] : jobs_) {
        if (is_active(s.state)) {
            s.state = JobState::failed;
            s.error = "interrupted by service restart";
            s.log_tail.push_back("error: interrupted by service restart");
            while (s.log_tail.size() > kJobLogLines) s.log_tail.pop_front();
            s.finished_at = utc_timestamp();
            journal_locked(s);
        }
    }
}

JobRegistry::~JobRegistry() {
    for (auto& t : threads_) {
        if (t.joinable()) t.join();
    }
}

void JobRegistry::journal_locked(const JobStatus& s) {
    if (!journal_) return;
    if (journal_->has_parent_path()) std::filesystem::create_directories(journal_->parent_path());
    std::ofstream out(*journal_, std::ios::app);
    out << s.to_json().dump() << '\n';
}

void JobRegistry::update(const std::string& id, const std::function<void(JobStatus&)>& fn, bool journal) {
    {
        std::lock_guard lock(mutex_);
        auto& s = jobs_.at(id);
        fn(s);
        if (journal) journal_locked(s);
    }
    changed_.notify_all();
}

std::string JobRegistry::submit(JobKind kind, nlohmann::json params, JobRunner runner) {
    std::string id;
    {
        std::lock_guard lock(mutex_);
        for (const auto& [other_id, s] : jobs_) {
            if (s.kind == kind && is_active(s.state)) {
                throw JobConflict("a " + std::string(job_kind_name(kind)) + " job is already active: " + other_id);
            }
        }
        char buf[32];
        std::snprintf(buf, sizeof buf, "job-%06llu", static_cast<unsigned long long>(next_id_++));
        id = buf;
        JobStatus s;
        s.id = id;
        s.kind = kind;
        s.params = std::move(params);
        s.created_at = utc_timestamp();
        journal_locked(s);
        jobs_[id] = std::move(s);
        order_.push_back(id);
        threads_.emplace_back([this, id, runner = std::move(runner)] { run(id, runner); });
    }
    changed_.notify_all();
    return id;
}

void JobRegistry::run(const std::string& id, JobRunner runner) {
    nlohmann::json params;
    update(id, [&params](JobStatus& s) {
        s.state = JobState::running;
        params = s.params;
    }, true);
    Handle handle(*this, id);
    try {
        const std::string result = runner(params, handle);
        update(id, [&result](JobStatus& s) {
            s.state = JobState::succeeded;
            s.progress = 1.0;
            if (!result.empty()) s.result_path = result;
            s.finished_at = utc_timestamp();
        }, true);
    } catch (const std::exception& e) {
        const std::string message = e.what();
        update(id, [&message](JobStatus& s) {
            s.state = JobState::failed;
            s.error = message;
            s.log_tail.push_back("error: " + message);
            while (s.log_tail.size() > kJobLogLines) s.log_tail.pop_front();
            s.finished_at = utc_timestamp();
        }, true);
    }
}

std::optional<JobStatus> JobRegistry::get(const std::string& id) const {
    std::lock_guard lock(mutex_);
    const auto it = jobs_.find(id);
    if (it == jobs_.end()) return std::nullopt;
    return it->second;
}

std::vector<JobStatus> JobRegistry::list() const {
    std::lock_guard lock(mutex_);
    std::vector<JobStatus> out;
    out.reserve(order_.size());
    for (const auto& id : order_) out.push_back(jobs_.at(id));
    return out;
}

void JobRegistry::wait(const std::string& id) const {
    std::unique_lock lock(mutex_);
    changed_.wait(lock, [&] {
        const auto it = jobs_.find(id);
        return it == jobs_.end() || !is_active(it->second.state);
    });
}

void JobRegistry::wait_all() const {
    std::unique_lock lock(mutex_);
    changed_.wait(lock, [&] {
        return std::none_of(jobs_.begin(), jobs_.end(), [](const auto& kv) { return is_active(kv.second.state); });
    });
}

} // namespace ragkit

/**
 * @file logging.hpp
 * @brief Minimal leveled logger that forwards to a caller-provided sink.
 */
#pragma once

#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>

namespace ragkit {

enum class LogLevel { debug, info, warn, error };

std::string_view log_level_name(LogLevel level) noexcept;

class Logger {
public:
    using Sink = std::function<void(LogLevel, std::string_view)>;

    Logger() = default;
    explicit Logger(Sink sink, LogLevel min_level = LogLevel::info)
        : sink_(std::move(sink)), min_level_(min_level) {}

    /// Writes "[level] message" lines to standard error.
    static Logger stderr_logger(LogLevel min_level = LogLevel::info);

    void log(LogLevel level, std::string_view message) const;
    void info(std::string_view m) const { log(LogLevel::info, m); }
    void warn(std::string_view m) const { log(LogLevel::warn, m); }
    void error(std::string_view m) const { log(LogLevel::error, m); }

private:
    Sink sink_;
    LogLevel min_level_ = LogLevel::info;
    std::shared_ptr<std::mutex> mutex_ = std::make_shared<std::mutex>();
};

inline void log_warn(const Logger* log, std::string_view m) {
    if (log != nullptr) log->warn(m);
}

} // namespace ragkit

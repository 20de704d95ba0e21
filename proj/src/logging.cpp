#include "ragkit/logging.hpp"

#include <iostream>

namespace ragkit {

std::string_view log_level_name(LogLevel level) noexcept {
    switch (level) {
    case LogLevel::debug: return "debug";
    case LogLevel::info: return "info";
    case LogLevel::warn: return "warn";
    case LogLevel::error: return "error";
    }
    return "info";
}

Logger Logger::stderr_logger(LogLevel min_level) {
    return Logger([](LogLevel level, std::string_view message) {
        std::cerr << '[' << log_level_name(level) << "] " << message << '\n';
    }, min_level);
}

void Logger::log(LogLevel level, std::string_view message) const {
    if (!sink_ || level < min_level_) return;
    std::lock_guard lock(*mutex_);
    sink_(level, message);
}

} // namespace ragkit

/**
 * @file workspace.hpp
 * @brief Writes pipeline config files that point at a mock endpoint.
 */
#pragma once

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <string>

namespace ragkit::test {

inline std::filesystem::path source_dir() { return RAGKIT_TEST_DATA_DIR; }

/// Config with every endpoint on `base_url`, workspace "ws" next to the file.
inline nlohmann::json mock_config(const std::string& base_url, const std::filesystem::path& manifest,
                                  const std::string& key_env = "RAGKIT_TEST_API_KEY") {
    nlohmann::json endpoint{{"base_url", base_url}, {"api_key_env", key_env}, {"timeout_s", 10},
                            {"retry", {{"max_attempts", 2}, {"base_backoff_s", 0.01}}}};
    nlohmann::json config;
    config["workspace"] = "ws";
    config["corpus"] = {{"manifest", manifest.string()}};
    config["endpoints"]["embedding"] = endpoint;
    config["endpoints"]["embedding"]["model"] = "mock-embed";
    config["endpoints"]["generator"] = endpoint;
    config["endpoints"]["generator"]["model"] = "mock-chat";
    config["endpoints"]["judge"] = endpoint;
    config["endpoints"]["judge"]["model"] = "mock-judge";
    config["server"] = {{"host", "127.0.0.1"}, {"port", 0}};
    return config;
}

inline std::filesystem::path write_config(const std::filesystem::path& dir, const nlohmann::json& config) {
    std::filesystem::create_directories(dir);
    const auto path = dir / "config.json";
    std::ofstream(path) << config.dump(2) << '\n';
    return path;
}

} // namespace ragkit::test

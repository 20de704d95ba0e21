/**
 * @file ragkit_mock.cpp
 * @brief Standalone deterministic mock of the embedding and chat endpoints.
 */
#include "ragkit/jsonl.hpp"
#include "ragkit/testing/mock_endpoint.hpp"

#include <CLI11.hpp>

#include <atomic>
#include <csignal>
#include <iostream>
#include <thread>

namespace {
std::atomic<bool> g_stop{false};
extern "C" void on_signal(int) { g_stop = true; }
} // namespace

int main(int argc, char** argv) {
    CLI::App app{"ragkit-mock: deterministic OpenAI-compatible mock endpoint", "ragkit-mock"};
    int port = 0;
    std::string options_path;
    std::string answers_path;
    std::size_t dims = 64;
    app.add_option("--port", port, "Port (0 picks a free one)")->check(CLI::Range(0, 65535));
    app.add_option("--options", options_path, "JSON file with mock options")->check(CLI::ExistingFile);
    app.add_option("--answers", answers_path, "Dataset JSONL whose gold answers the mock returns")->check(CLI::ExistingFile);
    app.add_option("--dims", dims, "Embedding dimensions")->check(CLI::PositiveNumber);
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    try {
        ragkit::testing::MockOptions options;
        if (!options_path.empty()) options = ragkit::testing::MockOptions::from_json(ragkit::read_json_file(options_path));
        if (app.count("--dims") > 0) options.embedding_dims = dims;
        if (!answers_path.empty()) {
            for (auto& [q, a] : ragkit::testing::answers_from_dataset(answers_path)) options.answers[q] = a;
        }
        ragkit::testing::MockEndpoint endpoint(options, port);
        std::cout << endpoint.base_url() << std::endl;
        std::signal(SIGINT, on_signal);
        std::signal(SIGTERM, on_signal);
        while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(100));
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

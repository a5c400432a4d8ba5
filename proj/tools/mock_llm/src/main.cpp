#include <csignal>
#include <iostream>

#include <CLI11.hpp>

#include "caselab_mock/mock_llm.hpp"

namespace {
volatile std::sig_atomic_t g_stop = 0;
}

int main(int argc, char** argv) {
    CLI::App app{"Deterministic chat-completions server for offline runs of `caselab reformulate`"};
    int port = 8089;
    app.add_option("--port", port, "Port on 127.0.0.1 (0 picks a free one)")->capture_default_str();
    CLI11_PARSE(app, argc, argv);

    caselab::mock::MockLlmServer server;
    server.start(port);
    std::cout << server.endpoint() << std::endl;
    std::signal(SIGINT, [](int) { g_stop = 1; });
    std::signal(SIGTERM, [](int) { g_stop = 1; });
    while (g_stop == 0) {
        std::this_thread::sleep_for(std::chrono::milliseconds(100));
    }
    return 0;
}

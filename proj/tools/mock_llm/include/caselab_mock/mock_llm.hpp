#pragma once

#include <atomic>
#include <chrono>
#include <deque>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace httplib {
class Server;
}

namespace caselab::mock {

/// Deterministic reply to a rendered prompt. The prompt's first line selects
/// the task (keyword / key sentence / summary); the rest is the query text.
std::string mock_completion(const std::string& prompt);

/// Local chat-completions server for tests and offline demos. Listens on
/// 127.0.0.1 at an ephemeral port until destroyed.
class MockLlmServer {
public:
    MockLlmServer();
    ~MockLlmServer();
    MockLlmServer(const MockLlmServer&) = delete;
    MockLlmServer& operator=(const MockLlmServer&) = delete;

    /// Binds to `port` (0 picks a free one) and starts serving.
    void start(int port = 0);
    void stop();

    int port() const noexcept { return port_; }
    std::string endpoint() const;

    /// The next requests answer with these HTTP statuses, in order, before normal replies resume.
    void push_failures(std::vector<int> statuses);
    /// Every request sleeps this long before answering.
    void set_delay(std::chrono::milliseconds delay);
    /// Replaces the generated content for every request.
    void set_fixed_reply(std::string content);

    std::size_t requests() const noexcept { return requests_.load(); }
    std::string last_body() const;
    /// Authorization header of the last request; empty when absent.
    std::string last_authorization() const;

private:
    std::unique_ptr<httplib::Server> server_;
    std::thread thread_;
    int port_ = 0;
    std::atomic<std::size_t> requests_{0};
    mutable std::mutex mu_;
    std::deque<int> failures_;
    std::chrono::milliseconds delay_{0};
    bool fixed_ = false;
    std::string fixed_reply_;
    std::string last_body_;
    std::string last_auth_;
};

} // namespace caselab::mock

#pragma once

#include <atomic>
#include <chrono>
#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "caselab/reformulate.hpp"

namespace caselab {

struct LlmConfig {
    /// Full chat-completions URL, e.g. "https://api.openai.com/v1/chat/completions".
    std::string endpoint;
    std::string model = "gpt-3.5-turbo";
    std::chrono::milliseconds timeout{60000};
    int max_retries = 3;
    std::chrono::milliseconds retry_backoff{500};
    int concurrency = 4;
    /// Name of the environment variable holding the API key.
    std::string api_key_env = "OPENAI_API_KEY";
    /// Extra numeric request fields (temperature, top_p, ...). Empty uses provider defaults.
    std::map<std::string, double> generation;

    void validate() const;

    /// `key = value` lines; '#' comments; string values may be quoted.
    /// Keys: endpoint, model, timeout_ms, max_retries, retry_backoff_ms,
    /// concurrency, api_key_env, and generation.<name>.
    static LlmConfig load(const std::filesystem::path& path);
    static LlmConfig parse(std::string_view text);
};

class ChatClient {
public:
    virtual ~ChatClient() = default;
    /// Returns the first choice's message content. Throws UpstreamError.
    virtual std::string complete(const std::string& model, const std::string& prompt) = 0;
};

/// POSTs {model, messages:[{role:"user", content}]} with retries on transport
/// errors, 429 and 5xx.
class HttpChatClient final : public ChatClient {
public:
    explicit HttpChatClient(LlmConfig config);

    std::string complete(const std::string& model, const std::string& prompt) override;

    std::size_t attempts() const noexcept { return attempts_.load(); }

private:
    LlmConfig config_;
    std::string scheme_host_port_;
    std::string path_;
    std::string api_key_;
    std::atomic<std::size_t> attempts_{0};
};

struct CacheEntry {
    std::string query_id;
    std::string type;
    std::string model;
    std::string prompt_fingerprint;
    std::string raw_response;
    std::string timestamp;
};

/// One JSON file per key under a directory. Writes are atomic and serialized per key.
class ResponseCache {
public:
    explicit ResponseCache(std::filesystem::path dir);

    static std::string key(const std::string& query_id, ReformulationType type,
                           const std::string& model, const std::string& prompt_fingerprint);

    std::optional<CacheEntry> get(const std::string& key) const;
    void put(const std::string& key, const CacheEntry& entry);

    const std::filesystem::path& dir() const noexcept { return dir_; }

private:
    std::filesystem::path path_for(const std::string& key) const;
    std::mutex& lock_for(const std::string& key);

    std::filesystem::path dir_;
    std::mutex locks_guard_;
    std::map<std::string, std::unique_ptr<std::mutex>> locks_;
};

/// Cache-first reformulation. `client` may be null for offline replay; a cache
/// miss then raises ConfigError.
class Reformulator {
public:
    Reformulator(PromptLibrary prompts, LlmConfig config, ResponseCache* cache, ChatClient* client);

    ReformulatedQuery reformulate(const QueryCase& query, ReformulationType type);

    /// Runs up to config.concurrency requests at once; output follows input order.
    /// The first failure is rethrown after in-flight requests finish.
    std::vector<ReformulatedQuery> reformulate_all(std::span<const QueryCase> queries,
                                                   ReformulationType type);

    std::size_t network_calls() const noexcept { return network_calls_.load(); }

private:
    PromptLibrary prompts_;
    LlmConfig config_;
    ResponseCache* cache_;
    ChatClient* client_;
    std::atomic<std::size_t> network_calls_{0};
};

/// Builds a ReformulatedQuery from a raw response (parsing, realignment for key
/// sentences, assembly). Empty responses yield a flagged query with no units.
ReformulatedQuery build_reformulated(const QueryCase& query, ReformulationType type,
                                     std::string raw_response, Provenance provenance);

inline ReformulatedQuery reformulate_query(const QueryCase& query, ReformulationType type,
                                           Reformulator& reformulator) {
    return reformulator.reformulate(query, type);
}

} // namespace caselab

#include "caselab/llm.hpp"

#include <cmath>
#include <cstdlib>
#include <exception>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "caselab/error.hpp"
#include "caselab/util.hpp"

namespace caselab {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// LlmConfig

void LlmConfig::validate() const {
    if (model.empty()) {
        throw ConfigError("llm config: model must not be empty");
    }
    if (timeout.count() <= 0) {
        throw ConfigError("llm config: timeout_ms must be positive");
    }
    if (max_retries < 0) {
        throw ConfigError("llm config: max_retries must be >= 0");
    }
    if (retry_backoff.count() < 0) {
        throw ConfigError("llm config: retry_backoff_ms must be >= 0");
    }
    if (concurrency < 1) {
        throw ConfigError("llm config: concurrency must be >= 1");
    }
    if (!endpoint.empty() && endpoint.rfind("http://", 0) != 0 && endpoint.rfind("https://", 0) != 0) {
        throw ConfigError("llm config: endpoint must start with http:// or https://");
    }
}

namespace {

long long parse_int(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const long long v = std::stoll(value, &used);
        if (used != value.size()) {
            throw std::invalid_argument(value);
        }
        return v;
    } catch (const std::exception&) {
        throw ConfigError("llm config: " + key + " expects an integer, got '" + value + "'");
    }
}

double parse_number(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const double v = std::stod(value, &used);
        if (used != value.size()) {
            throw std::invalid_argument(value);
        }
        return v;
    } catch (const std::exception&) {
        throw ConfigError("llm config: " + key + " expects a number, got '" + value + "'");
    }
}

} // namespace

LlmConfig LlmConfig::parse(std::string_view text) {
    LlmConfig cfg;
    const auto lines = split_lines(text);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        std::string_view line = trim(lines[i]);
        if (line.empty() || line.front() == '#') {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError("llm config line " + std::to_string(i + 1) + ": expected key = value");
        }
        const std::string key(trim(line.substr(0, eq)));
        std::string value(trim(line.substr(eq + 1)));
        if (value.size() >= 2 && (value.front() == '"' || value.front() == '\'') && value.back() == value.front()) {
            value = value.substr(1, value.size() - 2);
        }
        if (key == "endpoint") {
            cfg.endpoint = value;
        } else if (key == "model") {
            cfg.model = value;
        } else if (key == "timeout_ms") {
            cfg.timeout = std::chrono::milliseconds(parse_int(key, value));
        } else if (key == "max_retries") {
            cfg.max_retries = static_cast<int>(parse_int(key, value));
        } else if (key == "retry_backoff_ms") {
            cfg.retry_backoff = std::chrono::milliseconds(parse_int(key, value));
        } else if (key == "concurrency") {
            cfg.concurrency = static_cast<int>(parse_int(key, value));
        } else if (key == "api_key_env") {
            cfg.api_key_env = value;
        } else if (key.rfind("generation.", 0) == 0 && key.size() > 11) {
            cfg.generation[key.substr(11)] = parse_number(key, value);
        } else if (key == "api_key") {
            throw ConfigError("llm config: API keys are read from the environment only; set api_key_env instead");
        } else {
            throw ConfigError("llm config: unknown key '" + key + "'");
        }
    }
    cfg.validate();
    return cfg;
}

LlmConfig LlmConfig::load(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) {
        throw ConfigError("llm config not found: " + path.string());
    }
    return parse(read_file(path));
}

// ---------------------------------------------------------------------------
// HttpChatClient

HttpChatClient::HttpChatClient(LlmConfig config) : config_(std::move(config)) {
    config_.validate();
    if (config_.endpoint.empty()) {
        throw ConfigError("llm config: endpoint is required for network calls");
    }
    const auto scheme_end = config_.endpoint.find("://");
    const auto path_start = config_.endpoint.find('/', scheme_end + 3);
    scheme_host_port_ = config_.endpoint.substr(0, path_start);
    path_ = path_start == std::string::npos ? "/" : config_.endpoint.substr(path_start);
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
    if (config_.endpoint.rfind("https://", 0) == 0) {
        throw ConfigError("this build has no TLS support; use an http:// endpoint");
    }
#endif
    if (const char* key = std::getenv(config_.api_key_env.c_str()); key != nullptr) {
        api_key_ = key;
    }
}

std::string HttpChatClient::complete(const std::string& model, const std::string& prompt) {
    ordered_json body;
    body["model"] = model;
    body["messages"] = ordered_json::array({ordered_json{{"role", "user"}, {"content", prompt}}});
    for (const auto& [name, value] : config_.generation) {
        body[name] = value;
    }
    const std::string payload = body.dump();

    httplib::Client client(scheme_host_port_);
    const auto ms = config_.timeout.count();
    client.set_connection_timeout(ms / 1000, (ms % 1000) * 1000);
    client.set_read_timeout(ms / 1000, (ms % 1000) * 1000);
    client.set_write_timeout(ms / 1000, (ms % 1000) * 1000);
    httplib::Headers headers;
    if (!api_key_.empty()) {
        headers.emplace("Authorization", "Bearer " + api_key_);
    }

    std::string last_error;
    for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
        if (attempt > 0) {
            std::this_thread::sleep_for(config_.retry_backoff * (1LL << std::min(attempt - 1, 10)));
        }
        ++attempts_;
        auto res = client.Post(path_, headers, payload, "application/json");
        if (!res) {
            last_error = "transport error: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status == 429 || res->status >= 500) {
            last_error = "HTTP " + std::to_string(res->status);
            continue;
        }
        if (res->status < 200 || res->status >= 300) {
            throw UpstreamError("LLM endpoint returned HTTP " + std::to_string(res->status) + ": " +
                                res->body.substr(0, 200));
        }
        try {
            const auto j = json::parse(res->body);
            const auto& content = j.at("choices").at(0).at("message").at("content");
            return content.is_null() ? std::string() : content.get<std::string>();
        } catch (const json::exception& e) {
            throw UpstreamError(std::string("malformed LLM response: ") + e.what());
        }
    }
    throw UpstreamError("LLM request failed after " + std::to_string(config_.max_retries + 1) +
                        " attempts: " + last_error);
}

// ---------------------------------------------------------------------------
// ResponseCache

ResponseCache::ResponseCache(std::filesystem::path dir) : dir_(std::move(dir)) {}

std::string ResponseCache::key(const std::string& query_id, ReformulationType type, const std::string& model,
                               const std::string& prompt_fingerprint) {
    return fingerprint(query_id + '\x1f' + to_string(type) + '\x1f' + model + '\x1f' + prompt_fingerprint);
}

std::filesystem::path ResponseCache::path_for(const std::string& key) const {
    return dir_ / (key + ".json");
}

std::mutex& ResponseCache::lock_for(const std::string& key) {
    std::lock_guard guard(locks_guard_);
    auto& slot = locks_[key];
    if (!slot) {
        slot = std::make_unique<std::mutex>();
    }
    return *slot;
}

std::optional<CacheEntry> ResponseCache::get(const std::string& key) const {
    const auto path = path_for(key);
    if (!std::filesystem::exists(path)) {
        return std::nullopt;
    }
    try {
        const auto j = json::parse(read_file(path));
        CacheEntry e;
        e.query_id = j.at("query_id").get<std::string>();
        e.type = j.at("type").get<std::string>();
        e.model = j.at("model").get<std::string>();
        e.prompt_fingerprint = j.at("prompt_fingerprint").get<std::string>();
        e.raw_response = j.at("raw_response").get<std::string>();
        e.timestamp = j.at("timestamp").get<std::string>();
        return e;
    } catch (const json::exception& e) {
        throw FormatError("corrupt cache entry " + path.string() + ": " + e.what(), path.string(), 0);
    }
}

void ResponseCache::put(const std::string& key, const CacheEntry& entry) {
    std::lock_guard guard(lock_for(key));
    ordered_json j;
    j["query_id"] = entry.query_id;
    j["type"] = entry.type;
    j["model"] = entry.model;
    j["prompt_fingerprint"] = entry.prompt_fingerprint;
    j["raw_response"] = entry.raw_response;
    j["timestamp"] = entry.timestamp;
    write_file_atomic(path_for(key), j.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// Reformulator

ReformulatedQuery build_reformulated(const QueryCase& query, ReformulationType type, std::string raw_response,
                                     Provenance provenance) {
    ReformulatedQuery out;
    out.query_id = query.query_id;
    out.type = type;
    out.units = parse_response(raw_response, type);
    if (type == ReformulationType::key_sentence && !out.units.empty()) {
        out.units = realign_key_sentences(out.units, query).units;
    }
    out.raw_response = std::move(raw_response);
    out.provenance = std::move(provenance);
    if (out.units.empty()) {
        out.flagged = true;
    } else {
        out.assembled_text = assemble_query_text(out.units, type);
    }
    return out;
}

Reformulator::Reformulator(PromptLibrary prompts, LlmConfig config, ResponseCache* cache, ChatClient* client)
    : prompts_(std::move(prompts)), config_(std::move(config)), cache_(cache), client_(client) {
    config_.validate();
}

ReformulatedQuery Reformulator::reformulate(const QueryCase& query, ReformulationType type) {
    const std::string fp = prompts_.fingerprint(type);
    const std::string key = ResponseCache::key(query.query_id, type, config_.model, fp);
    if (cache_ != nullptr) {
        if (auto hit = cache_->get(key);
            hit && hit->query_id == query.query_id && hit->type == to_string(type) && hit->model == config_.model &&
            hit->prompt_fingerprint == fp) {
            return build_reformulated(query, type, hit->raw_response, {config_.model, fp, hit->timestamp});
        }
    }
    if (client_ == nullptr) {
        throw ConfigError("no cached " + to_string(type) + " response for query " + query.query_id +
                          " and no LLM endpoint configured");
    }
    ++network_calls_;
    std::string raw = client_->complete(config_.model, render_prompt(type, query, prompts_));
    const std::string ts = utc_timestamp();
    if (cache_ != nullptr) {
        cache_->put(key, {query.query_id, to_string(type), config_.model, fp, raw, ts});
    }
    return build_reformulated(query, type, std::move(raw), {config_.model, fp, ts});
}

std::vector<ReformulatedQuery> Reformulator::reformulate_all(std::span<const QueryCase> queries,
                                                             ReformulationType type) {
    std::vector<ReformulatedQuery> out(queries.size());
    std::vector<std::exception_ptr> errors(queries.size());
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    const auto worker = [&] {
        for (;;) {
            const std::size_t i = next++;
            if (i >= queries.size() || failed.load()) {
                return;
            }
            try {
                out[i] = reformulate(queries[i], type);
            } catch (...) {
                errors[i] = std::current_exception();
                failed = true;
            }
        }
    };
    const std::size_t n_workers =
        std::min<std::size_t>(static_cast<std::size_t>(config_.concurrency), std::max<std::size_t>(queries.size(), 1));
    std::vector<std::thread> threads;
    for (std::size_t w = 0; w < n_workers; ++w) {
        threads.emplace_back(worker);
    }
    for (auto& t : threads) {
        t.join();
    }
    for (const auto& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
    return out;
}

} // namespace caselab

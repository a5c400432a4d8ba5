#include "caselab_mock/mock_llm.hpp"

#include <set>

#include <httplib.h>
#include <json.hpp>

#include "caselab/tokenize.hpp"
#include "caselab/utf8.hpp"

namespace caselab::mock {

using json = nlohmann::json;

namespace {

std::string first_word(const std::string& sentence) {
    const std::u32string chars = utf8::decode(sentence);
    std::size_t i = 0;
    while (i < chars.size() && (utf8::is_space(chars[i]) || utf8::is_punct(chars[i]))) {
        ++i;
    }
    std::size_t j = i;
    const bool spaced = chars.find(U' ') != std::u32string::npos;
    while (j < chars.size() && !utf8::is_space(chars[j]) && !utf8::is_punct(chars[j]) && (spaced || j - i < 4)) {
        ++j;
    }
    return utf8::encode(std::u32string_view(chars).substr(i, j - i));
}

} // namespace

std::string mock_completion(const std::string& prompt) {
    const auto nl = prompt.find('\n');
    const std::string head = prompt.substr(0, nl);
    const std::string query = nl == std::string::npos ? std::string() : prompt.substr(nl + 1);
    const auto sentences = sentence_texts(query);
    if (head.find("keyword") != std::string::npos) {
        std::string out = "Keywords: ";
        std::set<std::string> seen;
        bool first = true;
        for (const auto& s : sentences) {
            const std::string w = first_word(s);
            if (w.empty() || !seen.insert(w).second) {
                continue;
            }
            out += (first ? "" : ", ") + w;
            first = false;
        }
        return out + ".";
    }
    if (head.find("key sentence") != std::string::npos) {
        std::vector<std::string> picked;
        for (std::size_t i = 0; i < sentences.size() && picked.size() < 3; i += 2) {
            picked.push_back(sentences[i]);
        }
        std::string out;
        for (std::size_t i = 0; i < picked.size(); ++i) {
            out += std::to_string(i + 1) + ". " + picked[picked.size() - 1 - i] + "\n";
        }
        return out;
    }
    if (head.find("summary") != std::string::npos) {
        std::string out;
        for (std::size_t i = 0; i < sentences.size() && i < 2; ++i) {
            out += sentences[i] + "。";
        }
        return out;
    }
    return {};
}

MockLlmServer::MockLlmServer() : server_(std::make_unique<httplib::Server>()) {
    server_->Post(".*", [this](const httplib::Request& req, httplib::Response& res) {
        ++requests_;
        int fail = 0;
        std::chrono::milliseconds delay{0};
        bool fixed = false;
        std::string fixed_reply;
        {
            std::lock_guard lock(mu_);
            last_body_ = req.body;
            last_auth_ = req.get_header_value("Authorization");
            if (!failures_.empty()) {
                fail = failures_.front();
                failures_.pop_front();
            }
            delay = delay_;
            fixed = fixed_;
            fixed_reply = fixed_reply_;
        }
        if (delay.count() > 0) {
            std::this_thread::sleep_for(delay);
        }
        if (fail != 0) {
            res.status = fail;
            res.set_content(R"({"error":{"message":"scripted failure"}})", "application/json");
            return;
        }
        std::string prompt;
        std::string model;
        try {
            const auto body = json::parse(req.body);
            model = body.at("model").get<std::string>();
            prompt = body.at("messages").at(0).at("content").get<std::string>();
        } catch (const json::exception&) {
            res.status = 400;
            res.set_content(R"({"error":{"message":"bad request"}})", "application/json");
            return;
        }
        json reply;
        reply["id"] = "mock-" + std::to_string(requests_.load());
        reply["object"] = "chat.completion";
        reply["model"] = model;
        reply["choices"] = json::array(
            {json{{"index", 0},
                  {"message", {{"role", "assistant"}, {"content", fixed ? fixed_reply : mock_completion(prompt)}}},
                  {"finish_reason", "stop"}}});
        res.set_content(reply.dump(), "application/json");
    });
}

MockLlmServer::~MockLlmServer() {
    stop();
}

void MockLlmServer::start(int port) {
    if (port == 0) {
        port_ = server_->bind_to_any_port("127.0.0.1");
    } else {
        server_->bind_to_port("127.0.0.1", port);
        port_ = port;
    }
    thread_ = std::thread([this] { server_->listen_after_bind(); });
    server_->wait_until_ready();
}

void MockLlmServer::stop() {
    if (thread_.joinable()) {
        server_->stop();
        thread_.join();
    }
}

std::string MockLlmServer::endpoint() const {
    return "http://127.0.0.1:" + std::to_string(port_) + "/v1/chat/completions";
}

void MockLlmServer::push_failures(std::vector<int> statuses) {
    std::lock_guard lock(mu_);
    failures_.insert(failures_.end(), statuses.begin(), statuses.end());
}

void MockLlmServer::set_delay(std::chrono::milliseconds delay) {
    std::lock_guard lock(mu_);
    delay_ = delay;
}

void MockLlmServer::set_fixed_reply(std::string content) {
    std::lock_guard lock(mu_);
    fixed_ = true;
    fixed_reply_ = std::move(content);
}

std::string MockLlmServer::last_body() const {
    std::lock_guard lock(mu_);
    return last_body_;
}

std::string MockLlmServer::last_authorization() const {
    std::lock_guard lock(mu_);
    return last_auth_;
}

} // namespace caselab::mock

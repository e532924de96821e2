#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <string>
#include <string_view>
#include <thread>

#include <json.hpp>

#include "ocrmend/error.hpp"

namespace ocrmend {

/// One completion call. Temperature is pinned at 0 pipeline-wide so repeated
/// runs stay comparable.
struct CompletionRequest {
    std::string prompt;
    double temperature = 0.0;
    size_t max_output_chars = 4000;
    std::string model_id;
    std::string request_id;
};

/// Provider-neutral completion service. Implementations must be safe to call
/// from several worker threads at once.
class CompletionClient {
public:
    virtual ~CompletionClient() = default;
    virtual std::string complete(const CompletionRequest& req) = 0;
    virtual bool is_live() const { return false; }
};

/// Echoes back whatever sits inside the first <input-text> block of the
/// prompt. The offline stand-in for "the model returned the text unchanged".
class IdentityMockClient : public CompletionClient {
public:
    std::string complete(const CompletionRequest& req) override {
        ++calls_;
        static constexpr std::string_view kOpen = "<input-text>";
        static constexpr std::string_view kClose = "</input-text>";
        size_t begin = req.prompt.find(kOpen);
        if (begin == std::string::npos)
            throw Error(ErrorCode::service_error, "prompt has no input-text block");
        begin += kOpen.size();
        size_t end = req.prompt.find(kClose, begin);
        if (end == std::string::npos)
            throw Error(ErrorCode::service_error, "prompt has unterminated input-text block");
        return req.prompt.substr(begin, end - begin);
    }

    size_t calls() const { return calls_.load(); }

private:
    std::atomic<size_t> calls_{0};
};

/// Replays recorded answers keyed by request_id. Missing fixtures are an
/// error rather than a silent fallthrough.
class ScriptedMockClient : public CompletionClient {
public:
    ScriptedMockClient() = default;
    explicit ScriptedMockClient(std::map<std::string, std::string> fixtures)
        : fixtures_(std::move(fixtures)) {}

    static ScriptedMockClient from_file(const std::string& path) {
        std::ifstream f(path, std::ios::binary);
        if (!f) throw Error(ErrorCode::io_error, "cannot open fixtures file " + path);
        nlohmann::json doc;
        try {
            f >> doc;
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorCode::malformed_input, e.what());
        }
        if (!doc.is_object())
            throw Error(ErrorCode::malformed_input, "fixtures file must be a JSON object");
        std::map<std::string, std::string> fixtures;
        for (const auto& [key, value] : doc.items()) fixtures[key] = value.get<std::string>();
        return ScriptedMockClient(std::move(fixtures));
    }

    void add(std::string request_id, std::string answer) {
        fixtures_[std::move(request_id)] = std::move(answer);
    }

    std::string complete(const CompletionRequest& req) override {
        ++calls_;
        auto it = fixtures_.find(req.request_id);
        if (it == fixtures_.end())
            throw Error(ErrorCode::fixture_missing, "no fixture for request " + req.request_id);
        return it->second;
    }

    size_t calls() const { return calls_.load(); }

private:
    std::map<std::string, std::string> fixtures_;
    std::atomic<size_t> calls_{0};
};

/// Wraps another client and records every (request_id, answer) pair, so live
/// answers can be captured into a fixtures file for offline replay.
class RecordingClient : public CompletionClient {
public:
    explicit RecordingClient(CompletionClient& inner) : inner_(inner) {}

    std::string complete(const CompletionRequest& req) override {
        std::string answer = inner_.complete(req);
        std::lock_guard<std::mutex> lock(mutex_);
        recorded_[req.request_id] = answer;
        return answer;
    }

    bool is_live() const override { return inner_.is_live(); }

    void save(const std::string& path) const {
        nlohmann::json doc = nlohmann::json::object();
        {
            std::lock_guard<std::mutex> lock(mutex_);
            for (const auto& [id, answer] : recorded_) doc[id] = answer;
        }
        std::ofstream f(path, std::ios::binary | std::ios::trunc);
        if (!f) throw Error(ErrorCode::io_error, "cannot write fixtures file " + path);
        f << doc.dump(2) << "\n";
    }

    size_t recorded_count() const {
        std::lock_guard<std::mutex> lock(mutex_);
        return recorded_.size();
    }

private:
    CompletionClient& inner_;
    mutable std::mutex mutex_;
    std::map<std::string, std::string> recorded_;
};

struct RetryPolicy {
    int max_attempts = 5;
    int base_delay_ms = 250;
    int max_delay_ms = 4000;

    int delay_ms(int attempt) const {  // attempt is 1-based
        int64_t d = static_cast<int64_t>(base_delay_ms) << (attempt - 1);
        return static_cast<int>(std::min<int64_t>(d, max_delay_ms));
    }
};

/// Caps the number of completion calls in flight across worker threads.
class ThrottledClient : public CompletionClient {
public:
    ThrottledClient(CompletionClient& inner, int limit)
        : inner_(inner), sem_(std::max(1, limit)) {}

    std::string complete(const CompletionRequest& req) override {
        sem_.acquire();
        try {
            std::string answer = inner_.complete(req);
            sem_.release();
            return answer;
        } catch (...) {
            sem_.release();
            throw;
        }
    }

    bool is_live() const override { return inner_.is_live(); }

private:
    CompletionClient& inner_;
    std::counting_semaphore<> sem_;
};

} // namespace ocrmend

#pragma once

#include <chrono>
#include <string>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "ocrmend/completion.hpp"
#include "ocrmend/error.hpp"

namespace ocrmend {

/// Completion over a plain HTTP endpoint. The wire contract is a POST of
/// {"model_id", "prompt", "temperature", "max_output"} answered by {"text"}.
/// Transient failures (timeouts, 429, 5xx) are retried with exponential
/// backoff; exhausting the retry budget surfaces a service_error.
class HttpCompletionClient : public CompletionClient {
public:
    HttpCompletionClient(std::string endpoint, std::string api_key, RetryPolicy retry = {})
        : api_key_(std::move(api_key)), retry_(retry) {
        parse_endpoint(endpoint);
    }

    bool is_live() const override { return true; }

    std::string complete(const CompletionRequest& req) override {
        if (req.temperature != 0.0)
            throw Error(ErrorCode::config_invalid, "temperature is pinned at 0");
        nlohmann::json body = {
            {"model_id", req.model_id},
            {"prompt", req.prompt},
            {"temperature", req.temperature},
            {"max_output", req.max_output_chars},
        };
        std::string payload = body.dump();

        std::string last_failure = "no attempt made";
        for (int attempt = 1; attempt <= retry_.max_attempts; ++attempt) {
            if (attempt > 1)
                std::this_thread::sleep_for(std::chrono::milliseconds(retry_.delay_ms(attempt - 1)));

            httplib::Client cli(base_);
            cli.set_connection_timeout(10, 0);
            cli.set_read_timeout(120, 0);
            httplib::Headers headers;
            if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);
            auto res = cli.Post(path_, headers, payload, "application/json");

            if (!res) {
                last_failure = "transport failure (" + httplib::to_string(res.error()) + ")";
                continue;
            }
            if (res->status == 429 || res->status == 408 || res->status >= 500) {
                last_failure = "status " + std::to_string(res->status);
                continue;
            }
            if (res->status != 200)
                throw Error(ErrorCode::service_error,
                            "completion endpoint returned status " + std::to_string(res->status));
            try {
                nlohmann::json doc = nlohmann::json::parse(res->body);
                return doc.at("text").get<std::string>();
            } catch (const nlohmann::json::exception& e) {
                throw Error(ErrorCode::service_error,
                            std::string("malformed completion response: ") + e.what());
            }
        }
        throw Error(ErrorCode::service_error,
                    "completion failed after " + std::to_string(retry_.max_attempts) +
                        " attempts; last: " + last_failure);
    }

private:
    void parse_endpoint(const std::string& endpoint) {
        // split scheme://host[:port] from the path
        size_t scheme = endpoint.find("://");
        if (scheme == std::string::npos)
            throw Error(ErrorCode::config_invalid, "endpoint must include a scheme: " + endpoint);
        size_t slash = endpoint.find('/', scheme + 3);
        if (slash == std::string::npos) {
            base_ = endpoint;
            path_ = "/";
        } else {
            base_ = endpoint.substr(0, slash);
            path_ = endpoint.substr(slash);
        }
    }

    std::string base_;
    std::string path_;
    std::string api_key_;
    RetryPolicy retry_;
};

} // namespace ocrmend

#pragma once
#include "personaforge/gateway.hpp"

#include <httplib.h>
#include <nlohmann/json.hpp>

#include <chrono>
#include <cstdlib>
#include <string>

namespace personaforge {

// OpenAI-style chat completion client. Speaks the plain chat wire format:
// POST {endpoint}/v1/chat/completions with model, messages, max_tokens and
// temperature; bearer token read from the profile's api_key_env variable.
// Build with CPPHTTPLIB_OPENSSL_SUPPORT for https endpoints.
class HttpBackend : public CompletionBackend {
public:
    Outcome<CompletionResult> send(const CompletionRequest& request, const ModelProfile& profile) override {
        const char* key = std::getenv(profile.api_key_env.c_str());
        if (!key || *key == '\0')
            return make_error(ErrorKind::ProviderRejection,
                              "API key environment variable not set: " + profile.api_key_env);

        nlohmann::json body = {
            {"model", profile.model_name},
            {"messages", nlohmann::json::array({{{"role", "user"}, {"content", request.prompt}}})},
            {"max_tokens", request.max_response_tokens},
            {"temperature", profile.temperature},
        };

        httplib::Client client(profile.endpoint_url);
        client.set_connection_timeout(30);
        client.set_read_timeout(120);
        httplib::Headers headers = {{"Authorization", std::string("Bearer ") + key}};

        auto started = std::chrono::steady_clock::now();
        auto res = client.Post("/v1/chat/completions", headers, body.dump(), "application/json");
        auto latency = std::chrono::duration_cast<std::chrono::milliseconds>(
                           std::chrono::steady_clock::now() - started)
                           .count();

        if (!res)
            return classify_error(httplib::to_string(res.error()), 0);
        if (res->status != 200) {
            std::string message = res->body;
            auto doc = nlohmann::json::parse(res->body, nullptr, false);
            if (!doc.is_discarded() && doc.contains("error") && doc["error"].contains("message"))
                message = doc["error"]["message"].get<std::string>();
            return classify_error(message, res->status);
        }

        auto doc = nlohmann::json::parse(res->body, nullptr, false);
        if (doc.is_discarded() || !doc.contains("choices") || doc["choices"].empty())
            return make_error(ErrorKind::MalformedResponse, "completion response missing choices");
        CompletionResult result;
        try {
            result.text = doc["choices"][0]["message"]["content"].get<std::string>();
        } catch (const nlohmann::json::exception&) {
            return make_error(ErrorKind::MalformedResponse, "completion response missing message content");
        }
        if (doc.contains("usage")) {
            const auto& usage = doc["usage"];
            if (usage.contains("prompt_tokens"))
                result.prompt_tokens_reported = usage["prompt_tokens"].get<long>();
            if (usage.contains("completion_tokens"))
                result.completion_tokens_reported = usage["completion_tokens"].get<long>();
        }
        result.latency_ms = latency;
        return result;
    }
};

} // namespace personaforge

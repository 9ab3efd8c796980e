#pragma once
#include "personaforge/result.hpp"
#include "personaforge/text.hpp"
#include "personaforge/token_estimator.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <semaphore>
#include <string>
#include <thread>

namespace personaforge {

struct ModelProfile {
    std::string model_name = "gpt-3.5-turbo-16k";
    int context_limit = 16385;
    int response_reserve = 2500;
    double temperature = 0.7;
    std::string endpoint_url = "https://api.openai.com";
    std::string api_key_env = "OPENAI_API_KEY";
    int max_attempts = 3;
    int backoff_base_ms = 1000;
    double backoff_factor = 2.0;
    int max_in_flight = 4;
};

struct CompletionRequest {
    std::string prompt;
    int max_response_tokens = 0;
    long estimated_prompt_tokens = 0;
    std::string stage; // pipeline stage tag, used for mock fixture keying
};

struct CompletionResult {
    std::string text;
    std::optional<long> prompt_tokens_reported;
    std::optional<long> completion_tokens_reported;
    long latency_ms = 0;
};

// Map a provider failure onto an error kind. Total: anything unrecognized
// lands on ProviderRejection. Status 0 means no HTTP response at all.
inline GatewayError classify_error(const std::string& provider_message, int status) {
    std::string lower = to_lower(provider_message);
    if (lower.find("maximum context length") != std::string::npos ||
        lower.find("context_length_exceeded") != std::string::npos)
        return GatewayError{ErrorKind::ContextOverflow, provider_message, false};
    if (status == 429)
        return GatewayError{ErrorKind::RateLimited,
                            provider_message.empty() ? "rate limited" : provider_message, true};
    if (status == 0 || status >= 500)
        return GatewayError{ErrorKind::Transport,
                            provider_message.empty() ? "transport failure" : provider_message, true};
    return GatewayError{ErrorKind::ProviderRejection,
                        provider_message.empty() ? "rejected with status " + std::to_string(status)
                                                 : provider_message,
                        false};
}

class CompletionBackend {
public:
    virtual ~CompletionBackend() = default;
    virtual Outcome<CompletionResult> send(const CompletionRequest& request, const ModelProfile& profile) = 0;
};

// Single point of contact with the completion endpoint. Every request
// passes the token-budget gate before transmission; retryable failures
// are retried with exponential backoff up to profile.max_attempts total
// attempts; in-flight requests are bounded by a semaphore.
class Gateway {
public:
    using Sleeper = std::function<void(std::chrono::milliseconds)>;

    Gateway(CompletionBackend& backend, ModelProfile profile, TokenEstimator estimator = {},
            Sleeper sleeper = nullptr)
        : backend_(backend),
          profile_(std::move(profile)),
          estimator_(std::move(estimator)),
          sleeper_(sleeper ? std::move(sleeper)
                           : [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); }),
          limiter_(std::max(1, profile_.max_in_flight)) {}

    const ModelProfile& profile() const { return profile_; }
    const TokenEstimator& estimator() const { return estimator_; }

    long estimate_tokens(std::string_view text) const { return estimator_.estimate(text); }

    // Budget gate: would this prompt fit, leaving room for the response?
    bool within_budget(long estimated_prompt_tokens, int max_response_tokens) const {
        return estimated_prompt_tokens + max_response_tokens <= profile_.context_limit;
    }

    Outcome<CompletionResult> complete(const std::string& prompt, const std::string& stage,
                                       int max_response_tokens = -1) {
        if (max_response_tokens < 0)
            max_response_tokens = profile_.response_reserve;
        CompletionRequest req;
        req.prompt = prompt;
        req.stage = stage;
        req.max_response_tokens = max_response_tokens;
        req.estimated_prompt_tokens = estimator_.estimate(prompt);
        if (!within_budget(req.estimated_prompt_tokens, max_response_tokens)) {
            return make_error(ErrorKind::ContextOverflow,
                              "estimated " + std::to_string(req.estimated_prompt_tokens) +
                                  " prompt tokens + " + std::to_string(max_response_tokens) +
                                  " response tokens exceed context limit " +
                                  std::to_string(profile_.context_limit) + "; not transmitted");
        }
        SlotGuard guard(limiter_);
        GatewayError last = make_error(ErrorKind::Transport, "no attempt made");
        for (int attempt = 1; attempt <= std::max(1, profile_.max_attempts); ++attempt) {
            auto out = backend_.send(req, profile_);
            if (out.ok())
                return out;
            last = out.error();
            if (!last.retryable || attempt == std::max(1, profile_.max_attempts))
                break;
            auto delay = static_cast<long>(profile_.backoff_base_ms *
                                           std::pow(profile_.backoff_factor, attempt - 1));
            sleeper_(std::chrono::milliseconds(delay));
        }
        return last;
    }

private:
    using Limiter = std::counting_semaphore<1 << 20>;
    struct SlotGuard {
        Limiter& sem;
        explicit SlotGuard(Limiter& s) : sem(s) { sem.acquire(); }
        ~SlotGuard() { sem.release(); }
        SlotGuard(const SlotGuard&) = delete;
        SlotGuard& operator=(const SlotGuard&) = delete;
    };

    CompletionBackend& backend_;
    ModelProfile profile_;
    TokenEstimator estimator_;
    Sleeper sleeper_;
    Limiter limiter_;
};

} // namespace personaforge

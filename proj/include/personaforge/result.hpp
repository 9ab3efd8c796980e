#pragma once
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>

namespace personaforge {

enum class ErrorKind {
    ContextOverflow,
    RateLimited,
    Transport,
    MalformedResponse,
    ProviderRejection,
};

inline const char* to_string(ErrorKind k) {
    switch (k) {
    case ErrorKind::ContextOverflow: return "ContextOverflow";
    case ErrorKind::RateLimited: return "RateLimited";
    case ErrorKind::Transport: return "Transport";
    case ErrorKind::MalformedResponse: return "MalformedResponse";
    case ErrorKind::ProviderRejection: return "ProviderRejection";
    }
    return "Unknown";
}

struct GatewayError {
    ErrorKind kind = ErrorKind::ProviderRejection;
    std::string detail;
    bool retryable = false;

    std::string message() const { return std::string(to_string(kind)) + ": " + detail; }
};

inline GatewayError make_error(ErrorKind kind, std::string detail) {
    bool retryable = kind == ErrorKind::RateLimited || kind == ErrorKind::Transport;
    return GatewayError{kind, std::move(detail), retryable};
}

// Value-or-GatewayError. Kept minimal; call ok() before value().
template <typename T>
class Outcome {
public:
    Outcome(T value) : v_(std::move(value)) {}
    Outcome(GatewayError error) : v_(std::move(error)) {}

    bool ok() const { return std::holds_alternative<T>(v_); }
    explicit operator bool() const { return ok(); }

    T& value() {
        if (!ok())
            throw std::logic_error("Outcome::value on error: " + error().message());
        return std::get<T>(v_);
    }
    const T& value() const {
        if (!ok())
            throw std::logic_error("Outcome::value on error: " + error().message());
        return std::get<T>(v_);
    }
    const GatewayError& error() const { return std::get<GatewayError>(v_); }

private:
    std::variant<T, GatewayError> v_;
};

} // namespace personaforge

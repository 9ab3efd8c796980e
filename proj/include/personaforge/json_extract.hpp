#pragma once
#include "personaforge/text.hpp"

#include <nlohmann/json.hpp>

#include <optional>
#include <string>
#include <string_view>

namespace personaforge {

// Pull a JSON document out of a model response: the whole text, a fenced
// code block, or the widest {...} / [...] span, tried in that order.
inline std::optional<nlohmann::json> extract_json(std::string_view response) {
    auto try_parse = [](std::string_view s) -> std::optional<nlohmann::json> {
        auto j = nlohmann::json::parse(s, nullptr, false);
        if (j.is_discarded())
            return std::nullopt;
        return j;
    };

    std::string trimmed = trim(response);
    if (auto j = try_parse(trimmed))
        return j;

    size_t fence = trimmed.find("```");
    if (fence != std::string::npos) {
        size_t body = trimmed.find('\n', fence);
        size_t close = body == std::string::npos ? std::string::npos : trimmed.find("```", body);
        if (body != std::string::npos && close != std::string::npos) {
            if (auto j = try_parse(trim(trimmed.substr(body, close - body))))
                return j;
        }
    }

    for (char open : {'{', '['}) {
        char shut = open == '{' ? '}' : ']';
        size_t b = trimmed.find(open);
        size_t e = trimmed.rfind(shut);
        if (b != std::string::npos && e != std::string::npos && e > b) {
            if (auto j = try_parse(trimmed.substr(b, e - b + 1)))
                return j;
        }
    }
    return std::nullopt;
}

// First present key among `keys`, as a string; empty if none.
inline std::string first_string(const nlohmann::json& obj, std::initializer_list<const char*> keys) {
    if (!obj.is_object())
        return {};
    for (const char* k : keys) {
        auto it = obj.find(k);
        if (it != obj.end() && it->is_string())
            return it->get<std::string>();
    }
    return {};
}

} // namespace personaforge

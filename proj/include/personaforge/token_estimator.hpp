#pragma once
#include "personaforge/text.hpp"

#include <cmath>
#include <functional>
#include <string_view>

namespace personaforge {

// Character-class token estimator. Counts one token per punctuation code
// point and max(1, len/chars_per_token) per alphanumeric run, which keeps
// the estimate at or above a word+punctuation reference count for any
// input while staying within ~20% of it on ordinary prose. An exact
// tokenizer can be plugged in via `exact_hook` when one is available.
struct TokenEstimator {
    double chars_per_token = 5.5;
    double inflation = 1.0;
    std::function<long(std::string_view)> exact_hook;

    long estimate(std::string_view text) const {
        if (exact_hook)
            return exact_hook(text);
        double total = 0.0;
        size_t run = 0;
        auto flush_run = [&] {
            if (run > 0)
                total += std::max(1.0, static_cast<double>(run) / chars_per_token);
            run = 0;
        };
        size_t i = 0;
        while (i < text.size()) {
            char32_t cp = utf8_next(text, i);
            if (is_space(cp)) {
                flush_run();
            } else if (is_word_char(cp)) {
                ++run;
            } else {
                flush_run();
                total += 1.0;
            }
        }
        flush_run();
        return static_cast<long>(std::ceil(total * inflation));
    }
};

} // namespace personaforge

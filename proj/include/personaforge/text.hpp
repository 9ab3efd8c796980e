#pragma once
#include <algorithm>
#include <cctype>
#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace personaforge {

// Decode one UTF-8 code point starting at i; advances i past it.
// Malformed bytes are consumed one at a time and returned as-is.
inline char32_t utf8_next(std::string_view s, size_t& i) {
    unsigned char c = static_cast<unsigned char>(s[i]);
    if (c < 0x80) {
        ++i;
        return c;
    }
    int extra = (c >= 0xf0) ? 3 : (c >= 0xe0) ? 2 : (c >= 0xc0) ? 1 : 0;
    if (extra == 0 || i + extra >= s.size()) {
        ++i;
        return c;
    }
    char32_t cp = c & (0x3f >> extra);
    for (int k = 1; k <= extra; ++k)
        cp = (cp << 6) | (static_cast<unsigned char>(s[i + k]) & 0x3f);
    i += static_cast<size_t>(extra) + 1;
    return cp;
}

inline bool is_space(char32_t cp) {
    return cp == ' ' || cp == '\t' || cp == '\n' || cp == '\r' || cp == '\f' || cp == '\v';
}

inline bool is_alnum_ascii(char32_t cp) {
    return (cp >= '0' && cp <= '9') || (cp >= 'A' && cp <= 'Z') || (cp >= 'a' && cp <= 'z');
}

// Word characters: ASCII alphanumerics plus any code point >= 0x80
// (accented letters in transcripts count as letters, not punctuation).
inline bool is_word_char(char32_t cp) {
    return is_alnum_ascii(cp) || cp >= 0x80;
}

inline std::string to_lower(std::string_view s) {
    std::string out(s);
    for (char& c : out)
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

// Collapse every whitespace run to a single space and trim the ends.
inline std::string normalize_whitespace(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    bool pending_space = false;
    for (char c : s) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            pending_space = !out.empty();
        } else {
            if (pending_space)
                out.push_back(' ');
            pending_space = false;
            out.push_back(c);
        }
    }
    return out;
}

inline std::string trim(std::string_view s) {
    size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b])))
        ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1])))
        --e;
    return std::string(s.substr(b, e - b));
}

inline std::vector<std::string> split_words(std::string_view s) {
    std::vector<std::string> out;
    size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i])))
            ++i;
        size_t start = i;
        while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i])))
            ++i;
        if (i > start)
            out.emplace_back(s.substr(start, i - start));
    }
    return out;
}

inline size_t count_words(std::string_view s) {
    size_t n = 0;
    bool in_word = false;
    for (char c : s) {
        bool ws = std::isspace(static_cast<unsigned char>(c)) != 0;
        if (!ws && !in_word)
            ++n;
        in_word = !ws;
    }
    return n;
}

inline std::vector<std::string> split_lines(std::string_view s) {
    std::vector<std::string> out;
    size_t start = 0;
    for (size_t i = 0; i <= s.size(); ++i) {
        if (i == s.size() || s[i] == '\n') {
            std::string_view line = s.substr(start, i - start);
            if (!line.empty() && line.back() == '\r')
                line.remove_suffix(1);
            out.emplace_back(line);
            start = i + 1;
        }
    }
    if (!out.empty() && out.back().empty())
        out.pop_back();
    return out;
}

// Split into sentences at '.', '!' or '?' followed by whitespace/EOF,
// and at blank lines. Keeps each sentence's original text, trimmed.
inline std::vector<std::string> split_sentences(std::string_view s) {
    std::vector<std::string> out;
    size_t start = 0;
    size_t i = 0;
    auto flush = [&](size_t end) {
        std::string piece = trim(s.substr(start, end - start));
        if (!piece.empty())
            out.push_back(std::move(piece));
    };
    while (i < s.size()) {
        char c = s[i];
        if (c == '.' || c == '!' || c == '?') {
            size_t j = i + 1;
            while (j < s.size() && (s[j] == '.' || s[j] == '!' || s[j] == '?' || s[j] == '"' || s[j] == '\''))
                ++j;
            if (j >= s.size() || std::isspace(static_cast<unsigned char>(s[j]))) {
                flush(j);
                start = j;
                i = j;
                continue;
            }
        }
        if (c == '\n') {
            size_t j = i + 1;
            while (j < s.size() && (s[j] == ' ' || s[j] == '\t' || s[j] == '\r'))
                ++j;
            if (j < s.size() && s[j] == '\n') { // blank line = paragraph break
                flush(i);
                start = j + 1;
                i = j + 1;
                continue;
            }
        }
        ++i;
    }
    flush(s.size());
    return out;
}

// Lowercased whitespace tokens, for fuzzy matching.
inline std::vector<std::string> match_tokens(std::string_view s) {
    auto words = split_words(to_lower(s));
    return words;
}

inline double jaccard(const std::unordered_set<std::string>& a, const std::unordered_set<std::string>& b) {
    if (a.empty() && b.empty())
        return 1.0;
    size_t inter = 0;
    const auto& small = a.size() <= b.size() ? a : b;
    const auto& large = a.size() <= b.size() ? b : a;
    for (const auto& t : small)
        inter += large.count(t);
    size_t uni = a.size() + b.size() - inter;
    return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

// Best token-set Jaccard between `needle` and any needle-sized window of
// `haystack`. Exact normalized substring short-circuits to 1.0.
inline double fuzzy_contains_score(std::string_view haystack, std::string_view needle) {
    std::string hnorm = normalize_whitespace(to_lower(haystack));
    std::string nnorm = normalize_whitespace(to_lower(needle));
    if (nnorm.empty())
        return 1.0;
    if (hnorm.find(nnorm) != std::string::npos)
        return 1.0;
    auto htok = split_words(hnorm);
    auto ntok = split_words(nnorm);
    if (ntok.size() > htok.size())
        return jaccard({htok.begin(), htok.end()}, {ntok.begin(), ntok.end()});
    std::unordered_set<std::string> nset(ntok.begin(), ntok.end());
    double best = 0.0;
    size_t w = ntok.size();
    for (size_t i = 0; i + w <= htok.size(); ++i) {
        std::unordered_set<std::string> window(htok.begin() + static_cast<long>(i),
                                               htok.begin() + static_cast<long>(i + w));
        best = std::max(best, jaccard(window, nset));
        if (best == 1.0)
            break;
    }
    return best;
}

inline bool fuzzy_contains(std::string_view haystack, std::string_view needle, double threshold = 0.8) {
    return fuzzy_contains_score(haystack, needle) >= threshold;
}

inline size_t levenshtein(std::string_view a, std::string_view b) {
    if (a.size() > b.size())
        std::swap(a, b);
    std::vector<size_t> row(a.size() + 1);
    for (size_t i = 0; i <= a.size(); ++i)
        row[i] = i;
    for (size_t j = 1; j <= b.size(); ++j) {
        size_t prev_diag = row[0];
        row[0] = j;
        for (size_t i = 1; i <= a.size(); ++i) {
            size_t del = row[i] + 1;
            size_t ins = row[i - 1] + 1;
            size_t sub = prev_diag + (a[i - 1] == b[j - 1] ? 0 : 1);
            prev_diag = row[i];
            row[i] = std::min({del, ins, sub});
        }
    }
    return row[a.size()];
}

// 1 - lev/max_len over raw bytes; 1.0 for two empty strings.
inline double name_similarity(std::string_view a, std::string_view b) {
    size_t m = std::max(a.size(), b.size());
    if (m == 0)
        return 1.0;
    return 1.0 - static_cast<double>(levenshtein(a, b)) / static_cast<double>(m);
}

} // namespace personaforge

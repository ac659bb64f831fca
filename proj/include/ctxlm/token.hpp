#pragma once

// Token normalization and tokenization.
//
// Tokens are lowercase strings with no internal whitespace; multiword
// station names are collapsed into single underscore-joined tokens.

#include <algorithm>
#include <cctype>
#include <string>
#include <string_view>
#include <vector>

namespace ctxlm {

using Token = std::string;

inline bool is_separator(char c) {
    switch (c) {
        case ' ': case '\t': case '\n': case '\r':
        case '.': case ',': case ';': case ':': case '!': case '?':
        case '\'': case '"': case '(': case ')': case '-':
            return true;
        default:
            return false;
    }
}

inline std::string lowercase(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) {
        return static_cast<char>(std::tolower(c));
    });
    return out;
}

// Splits on whitespace/punctuation, lowercases, then greedily collapses
// known multiword names (given as space-separated phrases, e.g.
// "milano centrale") into underscore-joined tokens. Total and idempotent.
inline std::vector<Token> tokenize(std::string_view text,
                                   const std::vector<std::string>& multiword_names = {}) {
    std::vector<Token> words;
    std::string cur;
    for (char c : text) {
        if (is_separator(c)) {
            if (!cur.empty()) { words.push_back(lowercase(cur)); cur.clear(); }
        } else {
            cur.push_back(c);
        }
    }
    if (!cur.empty()) words.push_back(lowercase(cur));

    if (multiword_names.empty() || words.empty()) return words;

    // Pre-split the multiword inventory once, longest phrases first.
    std::vector<std::vector<std::string>> phrases;
    for (const auto& name : multiword_names) {
        auto parts = tokenize(lowercase(name));
        if (parts.size() >= 2) phrases.push_back(std::move(parts));
    }
    std::sort(phrases.begin(), phrases.end(),
              [](const auto& a, const auto& b) { return a.size() > b.size(); });

    std::vector<Token> out;
    std::size_t i = 0;
    while (i < words.size()) {
        bool matched = false;
        for (const auto& ph : phrases) {
            if (i + ph.size() > words.size()) continue;
            if (std::equal(ph.begin(), ph.end(), words.begin() + i)) {
                std::string joined = ph[0];
                for (std::size_t k = 1; k < ph.size(); ++k) {
                    joined += '_';
                    joined += ph[k];
                }
                out.push_back(std::move(joined));
                i += ph.size();
                matched = true;
                break;
            }
        }
        if (!matched) out.push_back(words[i++]);
    }
    return out;
}

inline std::string join_tokens(const std::vector<Token>& toks, char sep = ' ') {
    std::string out;
    for (std::size_t i = 0; i < toks.size(); ++i) {
        if (i) out.push_back(sep);
        out += toks[i];
    }
    return out;
}

}  // namespace ctxlm

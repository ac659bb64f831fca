#pragma once

// Robust partial parsing of recognized token sequences into task-oriented
// case frames, plus the sentence-understanding (SU) metric.

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "ctxlm/token.hpp"

namespace ctxlm {

enum class Confirm : std::uint8_t { Yes, No };
enum class PartDay : std::uint8_t { Morning, Afternoon, Evening };

inline std::string_view to_string(Confirm c) { return c == Confirm::Yes ? "YES" : "NO"; }
inline std::string_view to_string(PartDay p) {
    switch (p) {
        case PartDay::Morning: return "MORNING";
        case PartDay::Afternoon: return "AFTERNOON";
        case PartDay::Evening: return "EVENING";
    }
    return "?";
}

struct CaseFrame {
    std::optional<Confirm> confirm;
    std::optional<std::string> dep_city;
    std::optional<std::string> arr_city;
    std::optional<std::string> dep_date;
    std::optional<PartDay> part_day;
    std::optional<int> hour;  // 0..23

    bool operator==(const CaseFrame&) const = default;

    bool empty() const {
        return !confirm && !dep_city && !arr_city && !dep_date && !part_day && !hour;
    }
};

// Canonical text form `slot=value;...` in fixed slot order; the empty
// frame serializes to the empty string.
inline std::string frame_to_string(const CaseFrame& f) {
    std::string out;
    auto add = [&](std::string_view slot, std::string_view value) {
        if (!out.empty()) out.push_back(';');
        out += slot;
        out.push_back('=');
        out += value;
    };
    if (f.confirm) add("confirm", to_string(*f.confirm));
    if (f.dep_city) add("dep-city", *f.dep_city);
    if (f.arr_city) add("arr-city", *f.arr_city);
    if (f.dep_date) add("dep-date", *f.dep_date);
    if (f.part_day) add("part-day", to_string(*f.part_day));
    if (f.hour) add("hour", std::to_string(*f.hour));
    return out;
}

inline CaseFrame frame_from_string(std::string_view text) {
    CaseFrame f;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t end = text.find(';', pos);
        if (end == std::string_view::npos) end = text.size();
        std::string_view field = text.substr(pos, end - pos);
        pos = end + 1;
        std::size_t eq = field.find('=');
        if (eq == std::string_view::npos) throw std::invalid_argument("bad frame field: " + std::string(field));
        std::string_view slot = field.substr(0, eq);
        std::string value(field.substr(eq + 1));
        if (slot == "confirm") {
            f.confirm = value == "YES" ? Confirm::Yes : Confirm::No;
        } else if (slot == "dep-city") {
            f.dep_city = value;
        } else if (slot == "arr-city") {
            f.arr_city = value;
        } else if (slot == "dep-date") {
            f.dep_date = value;
        } else if (slot == "part-day") {
            if (value == "MORNING") f.part_day = PartDay::Morning;
            else if (value == "AFTERNOON") f.part_day = PartDay::Afternoon;
            else f.part_day = PartDay::Evening;
        } else if (slot == "hour") {
            f.hour = std::stoi(value);
        } else {
            throw std::invalid_argument("unknown frame slot: " + std::string(slot));
        }
    }
    return f;
}

struct SemanticLexicon {
    std::set<Token> stations;
    std::map<Token, int> hour_words;       // surface -> 0..23 value (pre part-day shift)
    std::map<Token, PartDay> part_day_words;
    std::map<Token, std::string> date_words;  // surface -> canonical date value
    std::set<Token> yes_words;
    std::set<Token> no_words;
    std::set<Token> from_preps;
    std::set<Token> to_preps;
    std::set<Token> filler_words;  // hesitations, politeness, noise markers

    std::vector<std::string> multiword_station_phrases() const {
        std::vector<std::string> out;
        for (const auto& s : stations) {
            if (s.find('_') == std::string::npos) continue;
            std::string phrase = s;
            for (char& c : phrase)
                if (c == '_') c = ' ';
            out.push_back(phrase);
        }
        return out;
    }
};

// Multi-step robust partial parse: (1) confirmations/negations, (2) slot
// values by lexical category, (3) city roles via from/to prepositions with
// positional fallback (first city = departure). Unknown fragments are
// skipped; the function is total.
inline CaseFrame parse_frame(const std::vector<Token>& tokens, const SemanticLexicon& lex) {
    CaseFrame f;

    // Step 1: confirmation spotting, first occurrence wins.
    for (const Token& t : tokens) {
        if (lex.yes_words.count(t)) { f.confirm = Confirm::Yes; break; }
        if (lex.no_words.count(t)) { f.confirm = Confirm::No; break; }
    }

    // Step 2: time, date and day-period values.
    for (const Token& t : tokens) {
        if (!f.hour) {
            auto it = lex.hour_words.find(t);
            if (it != lex.hour_words.end()) { f.hour = it->second; continue; }
        }
        if (!f.part_day) {
            auto it = lex.part_day_words.find(t);
            if (it != lex.part_day_words.end()) { f.part_day = it->second; continue; }
        }
        if (!f.dep_date) {
            auto it = lex.date_words.find(t);
            if (it != lex.date_words.end()) { f.dep_date = it->second; continue; }
        }
    }

    // Step 3a: city roles from prepositional patterns.
    std::vector<bool> consumed(tokens.size(), false);
    for (std::size_t i = 0; i + 1 < tokens.size(); ++i) {
        if (!lex.stations.count(tokens[i + 1])) continue;
        if (lex.from_preps.count(tokens[i]) && !f.dep_city) {
            f.dep_city = tokens[i + 1];
            consumed[i + 1] = true;
        } else if (lex.to_preps.count(tokens[i]) && !f.arr_city) {
            f.arr_city = tokens[i + 1];
            consumed[i + 1] = true;
        }
    }
    // Step 3b: positional fallback for remaining city mentions.
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (consumed[i] || !lex.stations.count(tokens[i])) continue;
        if (!f.dep_city) {
            f.dep_city = tokens[i];
        } else if (!f.arr_city && tokens[i] != *f.dep_city) {
            f.arr_city = tokens[i];
        }
    }
    return f;
}

// Exact frame match, including absent-vs-present distinctions.
inline bool su_match(const CaseFrame& hyp, const CaseFrame& ref) { return hyp == ref; }

inline double su_rate(const std::vector<std::pair<CaseFrame, CaseFrame>>& pairs) {
    if (pairs.empty()) throw std::invalid_argument("su_rate: empty pair list");
    std::size_t hits = 0;
    for (const auto& [hyp, ref] : pairs)
        if (su_match(hyp, ref)) ++hits;
    return static_cast<double>(hits) / static_cast<double>(pairs.size());
}

}  // namespace ctxlm

#pragma once

// Desk-scale semantic lexicon for the railway timetable domain: a curated
// station inventory (extendable with synthesized names up to a requested
// size), time and date words, confirmations and function words.

#include <string>
#include <vector>

#include "ctxlm/semantics.hpp"

namespace ctxlm {

inline std::vector<std::string> station_inventory(std::size_t count) {
    static const std::vector<std::string> curated = {
        "milano",     "roma",     "torino",  "genova",  "napoli",
        "firenze",    "bologna",  "venezia", "alessandria", "lecce",
        "verona",     "trieste",  "bari",    "palermo", "como",
        "pisa",       "parma",    "padova",  "brescia", "ancona",
        "milano_centrale", "roma_termini",
    };
    std::vector<std::string> out(curated.begin(),
                                 curated.begin() + std::min(count, curated.size()));
    if (count <= curated.size()) return out;

    // Synthesized names fill out large lexicons deterministically.
    static const std::vector<std::string> pre = {"monte", "villa", "castel", "borgo", "san",
                                                 "porta", "campo", "rocca",  "valle", "fonte"};
    static const std::vector<std::string> mid = {"", "_di_", "_sul_"};
    static const std::vector<std::string> suf = {"bello", "nuovo", "franco", "alto",  "grande",
                                                 "rosso", "lungo", "verde",  "chiaro", "forte"};
    for (const auto& m : mid)
        for (const auto& p : pre)
            for (const auto& s : suf) {
                if (out.size() >= count) return out;
                out.push_back(p + m + s);
            }
    return out;
}

inline SemanticLexicon default_lexicon(std::size_t station_count = 40) {
    SemanticLexicon lex;
    for (auto& s : station_inventory(station_count)) lex.stations.insert(std::move(s));

    static const std::vector<std::pair<std::string, int>> hours = {
        {"one", 1},  {"two", 2},   {"three", 3}, {"four", 4},   {"five", 5},
        {"six", 6},  {"seven", 7}, {"eight", 8}, {"nine", 9},   {"ten", 10},
        {"eleven", 11}, {"twelve", 12},
        // Italian surface forms kept alongside the English glosses.
        {"sette", 7}, {"otto", 8},
    };
    for (const auto& [w, v] : hours) lex.hour_words[w] = v;

    lex.part_day_words = {{"morning", PartDay::Morning},
                          {"mattina", PartDay::Morning},
                          {"afternoon", PartDay::Afternoon},
                          {"evening", PartDay::Evening},
                          {"sera", PartDay::Evening}};

    for (const char* d : {"today", "tomorrow", "monday", "tuesday", "wednesday",
                          "thursday", "friday", "saturday", "sunday"})
        lex.date_words[d] = d;
    lex.date_words["domani"] = "tomorrow";
    lex.date_words["oggi"] = "today";

    lex.yes_words = {"yes", "si", "right", "exactly"};
    lex.no_words = {"no", "wrong"};
    lex.from_preps = {"from", "da"};
    lex.to_preps = {"to", "a"};
    lex.filler_words = {"at", "alle", "please", "ehm", "well", "i", "would",
                        "like", "want", "leave", "go", "train", "the", "in",
                        "departure", "<noise>"};
    return lex;
}

}  // namespace ctxlm

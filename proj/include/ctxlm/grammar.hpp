#pragma once

// Context-conditioned template grammar and the synthetic corpus
// generator. Grammar files group plain-text templates under
// `[CLASS <label>]` headers; `{slot}` placeholders are filled from the
// semantic lexicon. Every generated utterance carries the raw dialogue
// context it answers and a reference case frame consistent with the
// semantics module's parser.

#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "ctxlm/corpus.hpp"
#include "ctxlm/lexicon.hpp"
#include "ctxlm/rng.hpp"

namespace ctxlm {

struct TemplateGrammar {
    // template = sequence of literal tokens and {slot} placeholders
    std::map<LMClassId, std::vector<std::vector<std::string>>> templates;
};

inline TemplateGrammar parse_grammar(const std::string& text) {
    TemplateGrammar g;
    std::istringstream in(text);
    std::string line;
    LMClassId current = LMClassId::ContextIndependent;
    bool have_class = false;
    while (std::getline(in, line)) {
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        if (line.front() == '[') {
            if (line.back() != ']' || line.rfind("[CLASS ", 0) != 0)
                throw std::invalid_argument("grammar: bad section header: " + line);
            std::string label = line.substr(7, line.size() - 8);
            auto cls = parse_lm_class(label);
            if (!cls) throw std::invalid_argument("grammar: unknown class label: " + label);
            current = *cls;
            have_class = true;
            g.templates[current];
            continue;
        }
        if (!have_class) throw std::invalid_argument("grammar: template before [CLASS] header");
        std::vector<std::string> tmpl;
        std::istringstream ls(line);
        std::string tok;
        while (ls >> tok) tmpl.push_back(tok);
        g.templates[current].push_back(std::move(tmpl));
    }
    return g;
}

// Per-class training-material proportions of the field-trial corpus.
inline std::map<LMClassId, std::uint64_t> reference_class_counts() {
    return {
        {LMClassId::ReqDepCity, 375},   {LMClassId::ReqDepArrCity, 1808},
        {LMClassId::ReqArrCity, 374},   {LMClassId::ReqTime, 1291},
        {LMClassId::ReqDate, 1797},     {LMClassId::VerDepCity, 506},
        {LMClassId::VerDepArrCity, 1804}, {LMClassId::VerArrCity, 398},
        {LMClassId::VerTime, 1386},     {LMClassId::VerDate, 1565},
    };
}

inline std::map<LMClassId, std::uint64_t> scaled_class_counts(double scale) {
    std::map<LMClassId, std::uint64_t> out;
    for (const auto& [cls, n] : reference_class_counts())
        out[cls] = static_cast<std::uint64_t>(std::llround(static_cast<double>(n) * scale));
    return out;
}

inline std::string default_grammar_text() {
    return R"GRAMMAR(# Railway-enquiry answer templates, one dialogue-context class per section.
[CLASS DA-REQUEST dep-city]
from {dep}
da {dep}
{dep}
i leave from {dep}
departure from {dep}
from {dep} please

[CLASS DA-REQUEST dep-city, arr-city]
from {dep} to {arr}
da {dep} a {arr}
{dep} {arr}
i would like to go from {dep} to {arr}
from {dep} to {arr} in the {partday}
from {dep} to {arr} {date}
train from {dep} to {arr}
from {dep} to {arr} please

[CLASS DA-REQUEST arr-city]
to {arr}
a {arr}
i want to go to {arr}
to {arr} please
a {arr} please

[CLASS DA-REQUEST time]
at {hour}
alle {hour}
{hour}
in the {partday}
at {hour} in the {partday}
i want to leave at {hour}
di {partday}

[CLASS DA-REQUEST date]
{date}
on {date}
i leave {date}
{date} in the {partday}
on {date} please

[CLASS DA-VERIFY dep-city]
yes
yes
yes
si
right
no
no
wrong
yes from {dep}
no from {dep}

[CLASS DA-VERIFY dep-city, arr-city]
yes
yes
yes
si
exactly
no
no
yes from {dep} to {arr}
no from {dep} to {arr}
yes {dep} {arr}

[CLASS DA-VERIFY arr-city]
yes
yes
yes
si
right
no
no
wrong
yes to {arr}
no to {arr}

[CLASS DA-VERIFY time]
yes
yes
si
right
no
no
yes at {hour}
no at {hour}
yes in the {partday}
no in the {partday}

[CLASS DA-VERIFY date]
yes
yes
si
right
no
no
yes {date}
no {date}
no on {date}
yes on {date}
)GRAMMAR";
}

inline TemplateGrammar default_grammar() { return parse_grammar(default_grammar_text()); }

namespace detail {

inline const std::vector<DialogueContext>& context_variants(LMClassId cls) {
    using P = TaskParameter;
    using A = DialogueAct;
    static const std::map<LMClassId, std::vector<DialogueContext>> variants = {
        {LMClassId::ReqDepCity, {{A::Request, {P::DepCity}}}},
        {LMClassId::ReqDepArrCity, {{A::Request, {P::DepCity, P::ArrCity}}}},
        {LMClassId::ReqArrCity, {{A::Request, {P::ArrCity}}}},
        {LMClassId::ReqTime,
         {{A::Request, {P::DepTime}}, {A::Request, {P::Hour}}, {A::Request, {P::PartDay}}}},
        {LMClassId::ReqDate,
         {{A::Request, {P::DepDate}}, {A::Request, {P::WeekDay}}, {A::Request, {P::RelativeDay}}}},
        {LMClassId::VerDepCity, {{A::Verify, {P::DepCity}}}},
        {LMClassId::VerDepArrCity,
         {{A::Verify, {P::DepCity, P::ArrCity}},
          {A::Verify, {P::DepCity, P::ArrCity, P::PartDay}}}},
        {LMClassId::VerArrCity, {{A::Verify, {P::ArrCity}}}},
        {LMClassId::VerTime,
         {{A::Verify, {P::DepTime}}, {A::Verify, {P::PartDay}}, {A::Verify, {P::Hour}}}},
        {LMClassId::VerDate, {{A::Verify, {P::DepDate}}, {A::Verify, {P::WeekDay}}}},
    };
    return variants.at(cls);
}

template <typename T>
const T& pick(const std::vector<T>& v, std::mt19937_64& rng) {
    std::uniform_int_distribution<std::size_t> d(0, v.size() - 1);
    return v[d(rng)];
}

}  // namespace detail

// Deterministic per (grammar, counts, seed). Each utterance's ref_frame
// is built from the template's slot annotations; templates are written so
// the parser recovers exactly that frame.
inline Corpus generate_synthetic_corpus(const TemplateGrammar& grammar,
                                        const std::map<LMClassId, std::uint64_t>& class_counts,
                                        std::uint64_t seed,
                                        const SemanticLexicon& lex,
                                        double noise_token_prob = 0.0) {
    std::vector<std::string> stations(lex.stations.begin(), lex.stations.end());
    std::vector<std::string> hour_keys, partday_keys, date_keys;
    for (const auto& [k, v] : lex.hour_words) hour_keys.push_back(k);
    for (const auto& [k, v] : lex.part_day_words) partday_keys.push_back(k);
    for (const auto& [k, v] : lex.date_words) date_keys.push_back(k);

    Corpus corpus;
    std::size_t class_index = 0;
    for (LMClassId cls : all_lm_classes()) {
        if (cls == LMClassId::ContextIndependent) continue;
        ++class_index;
        auto itc = class_counts.find(cls);
        const std::uint64_t count = itc == class_counts.end() ? 0 : itc->second;
        if (count == 0) continue;
        auto itt = grammar.templates.find(cls);
        if (itt == grammar.templates.end() || itt->second.empty())
            throw std::invalid_argument("generate_synthetic_corpus: no templates for class '" +
                                        std::string(to_string(cls)) + "'");
        const auto& templates = itt->second;
        const auto& variants = detail::context_variants(cls);
        auto rng = make_rng(seed, std::string("gen/") + std::string(to_string(cls)));

        for (std::uint64_t i = 0; i < count; ++i) {
            const auto& tmpl = detail::pick(templates, rng);
            const DialogueContext& ctx = detail::pick(variants, rng);

            Utterance u;
            char idbuf[32];
            std::snprintf(idbuf, sizeof idbuf, "c%02zu-%05llu", class_index,
                          static_cast<unsigned long long>(i));
            u.id = idbuf;
            u.context = ctx;

            for (const auto& piece : tmpl) {
                if (piece == "{dep}") {
                    const std::string& s = detail::pick(stations, rng);
                    u.tokens.push_back(s);
                    u.ref_frame.dep_city = s;
                } else if (piece == "{arr}") {
                    std::string s = detail::pick(stations, rng);
                    while (u.ref_frame.dep_city && s == *u.ref_frame.dep_city)
                        s = detail::pick(stations, rng);
                    u.tokens.push_back(s);
                    u.ref_frame.arr_city = s;
                } else if (piece == "{hour}") {
                    const std::string& s = detail::pick(hour_keys, rng);
                    u.tokens.push_back(s);
                    u.ref_frame.hour = lex.hour_words.at(s);
                } else if (piece == "{partday}") {
                    const std::string& s = detail::pick(partday_keys, rng);
                    u.tokens.push_back(s);
                    u.ref_frame.part_day = lex.part_day_words.at(s);
                } else if (piece == "{date}") {
                    const std::string& s = detail::pick(date_keys, rng);
                    u.tokens.push_back(s);
                    u.ref_frame.dep_date = lex.date_words.at(s);
                } else {
                    u.tokens.push_back(piece);
                    if (!u.ref_frame.confirm) {
                        if (lex.yes_words.count(piece)) u.ref_frame.confirm = Confirm::Yes;
                        else if (lex.no_words.count(piece)) u.ref_frame.confirm = Confirm::No;
                    }
                    if (auto it = lex.part_day_words.find(piece);
                        it != lex.part_day_words.end() && !u.ref_frame.part_day)
                        u.ref_frame.part_day = it->second;
                }
            }
            if (noise_token_prob > 0.0) {
                std::uniform_real_distribution<double> d(0.0, 1.0);
                if (d(rng) < noise_token_prob) {
                    std::uniform_int_distribution<std::size_t> p(0, u.tokens.size());
                    u.tokens.insert(u.tokens.begin() + static_cast<std::ptrdiff_t>(p(rng)),
                                    "<noise>");
                }
            }
            corpus.push_back(std::move(u));
        }
    }
    return corpus;
}

}  // namespace ctxlm

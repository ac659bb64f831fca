#include "doctest.h"

#include <sstream>

#include "ctxlm/grammar.hpp"
#include "ctxlm/lexicon.hpp"
#include "ctxlm/semantics.hpp"

using namespace ctxlm;

TEST_CASE("parse_grammar reads sections and rejects malformed input") {
    TemplateGrammar g = parse_grammar(
        "# comment\n[CLASS DA-REQUEST time]\nat {hour}\nin the {partday}\n");
    REQUIRE(g.templates.count(LMClassId::ReqTime) == 1);
    CHECK(g.templates.at(LMClassId::ReqTime).size() == 2);
    CHECK(g.templates.at(LMClassId::ReqTime)[0] ==
          std::vector<std::string>{"at", "{hour}"});

    CHECK_THROWS(parse_grammar("[CLASS DA-SHOUT loud]\nx\n"));
    CHECK_THROWS(parse_grammar("orphan template line\n"));
    CHECK_THROWS(parse_grammar("[BROKEN\n"));
}

TEST_CASE("reference counts carry the field-trial distribution") {
    auto counts = reference_class_counts();
    CHECK(counts.at(LMClassId::ReqDepCity) == 375);
    CHECK(counts.at(LMClassId::ReqDepArrCity) == 1808);
    CHECK(counts.at(LMClassId::ReqArrCity) == 374);
    CHECK(counts.at(LMClassId::ReqTime) == 1291);
    CHECK(counts.at(LMClassId::ReqDate) == 1797);
    CHECK(counts.at(LMClassId::VerDepCity) == 506);
    CHECK(counts.at(LMClassId::VerDepArrCity) == 1804);
    CHECK(counts.at(LMClassId::VerArrCity) == 398);
    CHECK(counts.at(LMClassId::VerTime) == 1386);
    CHECK(counts.at(LMClassId::VerDate) == 1565);

    CHECK(scaled_class_counts(0.1).at(LMClassId::ReqTime) == 129);
    CHECK(scaled_class_counts(0.0).at(LMClassId::ReqTime) == 0);
}

TEST_CASE("generator honors counts, contexts and the single-word share") {
    SemanticLexicon lex = default_lexicon();
    std::map<LMClassId, std::uint64_t> counts = {{LMClassId::ReqTime, 129},
                                                 {LMClassId::VerDepCity, 51}};
    Corpus corpus = generate_synthetic_corpus(default_grammar(), counts, 5, lex);

    std::size_t req_time = 0, ver_dep = 0, ver_dep_single_yesno = 0;
    for (const auto& u : corpus) {
        LMClassId cls = classify_context(u.context);
        if (cls == LMClassId::ReqTime) ++req_time;
        if (cls == LMClassId::VerDepCity) {
            ++ver_dep;
            if (u.tokens.size() == 1 &&
                (lex.yes_words.count(u.tokens[0]) || lex.no_words.count(u.tokens[0])))
                ++ver_dep_single_yesno;
        }
    }
    CHECK(req_time == 129);
    CHECK(ver_dep == 51);
    // Verification answers are dominated by one-word yes/no (> 65%).
    CHECK(ver_dep_single_yesno >= 34);

    CHECK(generate_synthetic_corpus(default_grammar(), {}, 5, lex).empty());
    TemplateGrammar empty_templates;
    empty_templates.templates[LMClassId::ReqTime];
    CHECK_THROWS(generate_synthetic_corpus(empty_templates, counts, 5, lex));
}

TEST_CASE("generation is deterministic per seed") {
    SemanticLexicon lex = default_lexicon();
    auto counts = scaled_class_counts(0.02);
    Corpus a = generate_synthetic_corpus(default_grammar(), counts, 9, lex);
    Corpus b = generate_synthetic_corpus(default_grammar(), counts, 9, lex);
    Corpus c = generate_synthetic_corpus(default_grammar(), counts, 10, lex);
    REQUIRE(a.size() == b.size());
    bool identical = true, differs_by_seed = false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        identical = identical && a[i].tokens == b[i].tokens && a[i].id == b[i].id;
        if (a[i].tokens != c[i].tokens) differs_by_seed = true;
    }
    CHECK(identical);
    CHECK(differs_by_seed);
}

TEST_CASE("generator and parser agree on every reference frame") {
    SemanticLexicon lex = default_lexicon();
    Corpus corpus = generate_synthetic_corpus(default_grammar(), scaled_class_counts(0.05),
                                              21, lex);
    std::size_t checked = 0;
    for (const auto& u : corpus) {
        CaseFrame parsed = parse_frame(u.tokens, lex);
        CHECK(parsed == u.ref_frame);
        ++checked;
    }
    CHECK(checked == corpus.size());
}

TEST_CASE("context-matched lexical material differs by class") {
    SemanticLexicon lex = default_lexicon();
    Corpus corpus = generate_synthetic_corpus(default_grammar(), scaled_class_counts(0.05),
                                              13, lex);
    std::size_t time_with_time_word = 0, time_total = 0, city_with_station = 0, city_total = 0;
    for (const auto& u : corpus) {
        LMClassId cls = classify_context(u.context);
        bool has_time = false, has_station = false;
        for (const auto& t : u.tokens) {
            has_time = has_time || lex.hour_words.count(t) || lex.part_day_words.count(t);
            has_station = has_station || lex.stations.count(t);
        }
        if (cls == LMClassId::ReqTime) {
            ++time_total;
            if (has_time) ++time_with_time_word;
            CHECK(!has_station);
        }
        if (cls == LMClassId::ReqDepArrCity) {
            ++city_total;
            if (has_station) ++city_with_station;
        }
    }
    CHECK(time_with_time_word == time_total);
    CHECK(city_with_station == city_total);
}

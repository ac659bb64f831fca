#pragma once

// Evaluation harness: builds the context-independent and
// context-dependent conditions from a synthetic corpus and compares them
// at perplexity, recognition (WA) and understanding (SU) level, split
// into Requests / Confirms / Global groups.

#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "ctxlm/classlm.hpp"
#include "ctxlm/contextmap.hpp"
#include "ctxlm/corpus.hpp"
#include "ctxlm/dialog.hpp"
#include "ctxlm/grammar.hpp"
#include "ctxlm/lexicon.hpp"
#include "ctxlm/recsim.hpp"
#include "ctxlm/registry.hpp"
#include "ctxlm/wordclass.hpp"

namespace ctxlm {

struct EvalConfig {
    double corpus_scale = 0.1;
    std::uint64_t seed = 42;
    int num_seeds = 5;
    std::uint32_t num_classes = 0;  // word classes per model; 0 = one class per word
    bool cluster_global = true;     // cluster once on the whole training set
    std::size_t cluster_max_sweeps = 20;
    Smoothing smoothing = Smoothing::WittenBell;
    double unk_floor = 1e-6;
    double lambda = 1.0;
    std::size_t nbest_n = 10;
    double noise = 0.6;
    double test_ratio = 0.2;
    // Robustness thresholds, expressed at the configured corpus scale.
    std::uint64_t robust_min_utterances = 50;
    std::uint64_t robust_min_multiword = 20;
    std::size_t station_count = 40;
    double noise_token_prob = 0.0;
};

inline void to_json(nlohmann::json& j, const EvalConfig& c) {
    j = {{"corpus_scale", c.corpus_scale},
         {"seed", c.seed},
         {"num_seeds", c.num_seeds},
         {"num_classes", c.num_classes},
         {"cluster_global", c.cluster_global},
         {"cluster_max_sweeps", c.cluster_max_sweeps},
         {"smoothing", c.smoothing == Smoothing::WittenBell ? "witten-bell" : "none"},
         {"unk_floor", c.unk_floor},
         {"lambda", c.lambda},
         {"nbest_n", c.nbest_n},
         {"noise", c.noise},
         {"test_ratio", c.test_ratio},
         {"robust_min_utterances", c.robust_min_utterances},
         {"robust_min_multiword", c.robust_min_multiword},
         {"station_count", c.station_count},
         {"noise_token_prob", c.noise_token_prob}};
}

inline void from_json(const nlohmann::json& j, EvalConfig& c) {
    auto get = [&](const char* key, auto& field) {
        if (j.contains(key)) j.at(key).get_to(field);
    };
    get("corpus_scale", c.corpus_scale);
    get("seed", c.seed);
    get("num_seeds", c.num_seeds);
    get("num_classes", c.num_classes);
    get("cluster_global", c.cluster_global);
    get("cluster_max_sweeps", c.cluster_max_sweeps);
    if (j.contains("smoothing")) {
        std::string s = j.at("smoothing").get<std::string>();
        if (s == "witten-bell") c.smoothing = Smoothing::WittenBell;
        else if (s == "none") c.smoothing = Smoothing::None;
        else throw std::invalid_argument("config: unknown smoothing '" + s + "'");
    }
    get("unk_floor", c.unk_floor);
    get("lambda", c.lambda);
    get("nbest_n", c.nbest_n);
    get("noise", c.noise);
    get("test_ratio", c.test_ratio);
    get("robust_min_utterances", c.robust_min_utterances);
    get("robust_min_multiword", c.robust_min_multiword);
    get("station_count", c.station_count);
    get("noise_token_prob", c.noise_token_prob);
}

struct ConditionMetrics {
    double pp = 0.0;
    double wa = 0.0;  // pooled, token-weighted
    double su = 0.0;
};

struct GroupRow {
    std::string group;  // "Requests", "Confirms", "Global"
    std::uint64_t utterances = 0;
    ConditionMetrics ci;
    ConditionMetrics cd;

    double pp_reduction() const { return (ci.pp - cd.pp) / ci.pp; }
    double wa_error_reduction() const {
        double e = 1.0 - ci.wa;
        return e > 0.0 ? ((1.0 - ci.wa) - (1.0 - cd.wa)) / e : 0.0;
    }
    double su_error_reduction() const {
        double e = 1.0 - ci.su;
        return e > 0.0 ? ((1.0 - ci.su) - (1.0 - cd.su)) / e : 0.0;
    }
};

struct ComparisonReport {
    std::vector<GroupRow> rows;  // Requests, Confirms, Global
    std::vector<std::uint64_t> seeds;
    EvalConfig config;

    const GroupRow& group(const std::string& name) const {
        for (const auto& r : rows)
            if (r.group == name) return r;
        throw std::out_of_range("no group " + name);
    }
};

// One trained condition pair set for a single seed.
struct TrainedConditions {
    LMRegistry registry;          // context-dependent set with fallback + policy
    Corpus test;
    Corpus train;
    SemanticLexicon lexicon;
    ConfusionTable confusions;
};

inline LMPair train_pair(const Corpus& corpus, const Vocabulary& global_vocab,
                         const WordClassMap& global_map, const EvalConfig& cfg,
                         const std::string& label) {
    Vocabulary vocab = build_vocabulary(corpus);
    WordClassMap map = project_classmap(global_vocab, global_map, vocab);
    auto bi = std::make_shared<ClassNGramModel>(
        train_class_ngram(corpus, vocab, map, 2, cfg.smoothing, cfg.unk_floor, label));
    auto tri = std::make_shared<ClassNGramModel>(
        train_class_ngram(corpus, vocab, map, 3, cfg.smoothing, cfg.unk_floor, label));
    return {std::move(bi), std::move(tri)};
}

// Generates the corpus for one seed, splits it, trains the
// context-independent pair plus every specific pair, and assembles the
// registry with the robustness policy.
inline TrainedConditions build_conditions(const EvalConfig& cfg, const TemplateGrammar& grammar,
                                          std::uint64_t seed) {
    TrainedConditions out;
    out.lexicon = default_lexicon(cfg.station_count);
    out.confusions = default_confusion_table(out.lexicon);

    Corpus corpus = generate_synthetic_corpus(grammar, scaled_class_counts(cfg.corpus_scale),
                                              seed, out.lexicon, cfg.noise_token_prob);
    CorpusSplit split = split_corpus(corpus, cfg.test_ratio, seed);
    out.train = std::move(split.train);
    out.test = std::move(split.test);

    Vocabulary vocab = build_vocabulary(out.train);
    WordClassMap classmap =
        cfg.num_classes > 0 && cfg.num_classes < vocab.size() - 2
            ? cluster_words_detailed(out.train, vocab, cfg.num_classes, cfg.cluster_max_sweeps,
                                     seed)
                  .map
            : identity_classmap(vocab);

    out.registry.set_policy({cfg.robust_min_utterances, cfg.robust_min_multiword});
    out.registry.set_models(LMClassId::ContextIndependent,
                            train_pair(out.train, vocab, classmap, cfg,
                                       std::string(to_string(LMClassId::ContextIndependent))));

    std::map<LMClassId, Corpus> by_class;
    for (const auto& u : out.train) by_class[classify_context(u.context)].push_back(u);
    for (LMClassId cls : all_lm_classes()) {
        if (cls == LMClassId::ContextIndependent) continue;
        auto it = by_class.find(cls);
        if (it == by_class.end() || it->second.empty()) continue;
        Vocabulary sub_vocab;  // per-model vocabulary, built inside train_pair
        if (!cfg.cluster_global) {
            sub_vocab = build_vocabulary(it->second);
            std::uint32_t k = std::min<std::uint32_t>(cfg.num_classes, sub_vocab.size() - 2);
            WordClassMap sub_map =
                cfg.num_classes > 0 && k >= 1 && k < sub_vocab.size() - 2
                    ? cluster_words_detailed(it->second, sub_vocab, k, cfg.cluster_max_sweeps,
                                             seed)
                          .map
                    : identity_classmap(sub_vocab);
            auto bi = std::make_shared<ClassNGramModel>(
                train_class_ngram(it->second, sub_vocab, sub_map, 2, cfg.smoothing,
                                  cfg.unk_floor, std::string(to_string(cls))));
            auto tri = std::make_shared<ClassNGramModel>(
                train_class_ngram(it->second, sub_vocab, sub_map, 3, cfg.smoothing,
                                  cfg.unk_floor, std::string(to_string(cls))));
            out.registry.set_models(cls, {std::move(bi), std::move(tri)});
        } else {
            out.registry.set_models(cls, train_pair(it->second, vocab, classmap, cfg,
                                                    std::string(to_string(cls))));
        }
    }
    return out;
}

namespace detail {

struct MetricAccum {
    double logprob = 0.0;
    std::uint64_t tokens = 0;
    std::uint64_t ref_words = 0;
    std::uint64_t edit_errors = 0;
    std::uint64_t su_hits = 0;
    std::uint64_t utterances = 0;

    ConditionMetrics finish() const {
        ConditionMetrics m;
        m.pp = tokens ? std::exp(-logprob / static_cast<double>(tokens)) : 0.0;
        m.wa = ref_words ? (static_cast<double>(ref_words) - static_cast<double>(edit_errors)) /
                               static_cast<double>(ref_words)
                         : 0.0;
        m.su = utterances ? static_cast<double>(su_hits) / static_cast<double>(utterances) : 0.0;
        return m;
    }

    void merge(const MetricAccum& o) {
        logprob += o.logprob;
        tokens += o.tokens;
        ref_words += o.ref_words;
        edit_errors += o.edit_errors;
        su_hits += o.su_hits;
        utterances += o.utterances;
    }
};

}  // namespace detail

// Evaluates both conditions on the identical test set and identical
// noisy-channel output; accumulators are keyed (group, condition).
inline void accumulate_comparison(const TrainedConditions& tc, const EvalConfig& cfg,
                                  std::uint64_t channel_seed,
                                  std::map<std::string, detail::MetricAccum>& acc) {
    const LMPair& ci = tc.registry.fallback();
    SentenceScorer ci_bi = make_scorer(ci.bigram);
    SentenceScorer ci_tri = make_scorer(ci.trigram);

    for (const auto& u : tc.test) {
        const std::string group =
            u.context.act == DialogueAct::Request ? "Requests" : "Confirms";
        const LMPair& cd = tc.registry.models_for(tc.registry.resolve(u.context));

        NBestList nbest = generate_nbest(u, tc.confusions, cfg.nbest_n, cfg.noise, channel_seed);
        Hypothesis ci_best = rescore(nbest, ci_bi, ci_tri, cfg.lambda);
        Hypothesis cd_best =
            rescore(nbest, make_scorer(cd.bigram), make_scorer(cd.trigram), cfg.lambda);

        CaseFrame ci_frame = parse_frame(ci_best.tokens, tc.lexicon);
        CaseFrame cd_frame = parse_frame(cd_best.tokens, tc.lexicon);

        for (const std::string& g : {group, std::string("Global")}) {
            auto& a_ci = acc[g + "/ci"];
            auto& a_cd = acc[g + "/cd"];
            a_ci.logprob += sentence_logprob(*ci.bigram, u.tokens);
            a_cd.logprob += sentence_logprob(*cd.bigram, u.tokens);
            a_ci.tokens += u.tokens.size() + 1;
            a_cd.tokens += u.tokens.size() + 1;
            a_ci.ref_words += u.tokens.size();
            a_cd.ref_words += u.tokens.size();
            a_ci.edit_errors += align_edits(ci_best.tokens, u.tokens).total();
            a_cd.edit_errors += align_edits(cd_best.tokens, u.tokens).total();
            a_ci.su_hits += su_match(ci_frame, u.ref_frame) ? 1 : 0;
            a_cd.su_hits += su_match(cd_frame, u.ref_frame) ? 1 : 0;
            a_ci.utterances += 1;
            a_cd.utterances += 1;
        }
    }
}

inline ComparisonReport run_compare(const EvalConfig& cfg, const TemplateGrammar& grammar,
                                    std::ostream* log = nullptr) {
    ComparisonReport report;
    report.config = cfg;
    std::map<std::string, detail::MetricAccum> acc;
    for (int i = 0; i < cfg.num_seeds; ++i) {
        const std::uint64_t seed = cfg.seed + static_cast<std::uint64_t>(i);
        report.seeds.push_back(seed);
        if (log) *log << "seed " << seed << ": training conditions...\n";
        TrainedConditions tc = build_conditions(cfg, grammar, seed);
        accumulate_comparison(tc, cfg, seed, acc);
    }
    for (const char* g : {"Requests", "Confirms", "Global"}) {
        GroupRow row;
        row.group = g;
        row.utterances = acc[std::string(g) + "/ci"].utterances;
        row.ci = acc[std::string(g) + "/ci"].finish();
        row.cd = acc[std::string(g) + "/cd"].finish();
        report.rows.push_back(std::move(row));
    }
    return report;
}

// TSV carries one decimal place; the JSON report keeps full precision.
inline std::string report_to_tsv(const ComparisonReport& r) {
    std::ostringstream out;
    auto fmt = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.1f", v);
        return std::string(buf);
    };
    out << "metric\tgroup\tutterances\tcontext-indep\tcontext-dep\trel-reduction-%\n";
    for (const auto& row : r.rows)
        out << "PP\t" << row.group << '\t' << row.utterances << '\t' << fmt(row.ci.pp) << '\t'
            << fmt(row.cd.pp) << '\t' << fmt(100.0 * row.pp_reduction()) << '\n';
    for (const auto& row : r.rows)
        out << "WA\t" << row.group << '\t' << row.utterances << '\t' << fmt(100.0 * row.ci.wa)
            << '\t' << fmt(100.0 * row.cd.wa) << '\t' << fmt(100.0 * row.wa_error_reduction())
            << '\n';
    for (const auto& row : r.rows)
        out << "SU\t" << row.group << '\t' << row.utterances << '\t' << fmt(100.0 * row.ci.su)
            << '\t' << fmt(100.0 * row.cd.su) << '\t' << fmt(100.0 * row.su_error_reduction())
            << '\n';
    return out.str();
}

inline nlohmann::json report_to_json(const ComparisonReport& r) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : r.rows) {
        rows.push_back({{"group", row.group},
                        {"utterances", row.utterances},
                        {"context_independent",
                         {{"pp", row.ci.pp}, {"wa", row.ci.wa}, {"su", row.ci.su}}},
                        {"context_dependent",
                         {{"pp", row.cd.pp}, {"wa", row.cd.wa}, {"su", row.cd.su}}},
                        {"pp_reduction", row.pp_reduction()},
                        {"wa_error_reduction", row.wa_error_reduction()},
                        {"su_error_reduction", row.su_error_reduction()}});
    }
    return {{"rows", rows}, {"seeds", r.seeds}, {"config", r.config}};
}

}  // namespace ctxlm

#pragma once

// Corpus data model: annotated utterances, vocabulary construction,
// deterministic stratified train/test splitting, and the tab-separated
// corpus file format.

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "ctxlm/contextmap.hpp"
#include "ctxlm/rng.hpp"
#include "ctxlm/semantics.hpp"
#include "ctxlm/token.hpp"

namespace ctxlm {

struct Utterance {
    std::string id;
    std::vector<Token> tokens;  // non-empty
    DialogueContext context;
    CaseFrame ref_frame;
};

using Corpus = std::vector<Utterance>;

struct Vocabulary {
    std::vector<Token> entries;  // dense ids 0..|V|-1
    std::uint32_t unk_id = 0;
    std::uint32_t bos_id = 1;
    std::uint32_t eos_id = 2;
    std::unordered_map<Token, std::uint32_t> index;

    static constexpr const char* kUnk = "<unk>";
    static constexpr const char* kBos = "<s>";
    static constexpr const char* kEos = "</s>";

    std::uint32_t size() const { return static_cast<std::uint32_t>(entries.size()); }

    std::uint32_t lookup(const Token& t) const {
        auto it = index.find(t);
        return it == index.end() ? unk_id : it->second;
    }

    bool contains(const Token& t) const { return index.count(t) != 0; }

    void rebuild_index() {
        index.clear();
        for (std::uint32_t i = 0; i < entries.size(); ++i) index[entries[i]] = i;
    }
};

// Keeps every token with count >= min_count; rarer tokens map to <unk>
// at lookup time. Boundary markers and <unk> are always present.
inline Vocabulary build_vocabulary(const Corpus& corpus, std::uint64_t min_count = 1) {
    if (corpus.empty()) throw std::invalid_argument("empty corpus");
    std::map<Token, std::uint64_t> counts;  // ordered for stable ids
    for (const auto& u : corpus)
        for (const auto& t : u.tokens) ++counts[t];

    Vocabulary v;
    v.entries = {Vocabulary::kUnk, Vocabulary::kBos, Vocabulary::kEos};
    for (const auto& [tok, n] : counts) {
        if (n < min_count) continue;
        if (tok == Vocabulary::kUnk || tok == Vocabulary::kBos || tok == Vocabulary::kEos)
            continue;
        v.entries.push_back(tok);
    }
    v.rebuild_index();
    return v;
}

struct CorpusSplit {
    Corpus train;
    Corpus test;
    std::uint64_t seed = 0;
    std::vector<std::string> warnings;
};

// Deterministic stratified split: |test| = round(ratio * |corpus|), with
// test rows drawn per LM class so every class keeps training data where
// possible. A warning is recorded for any class whose train side empties.
inline CorpusSplit split_corpus(const Corpus& corpus, double test_ratio, std::uint64_t seed) {
    if (corpus.size() < 2) throw std::invalid_argument("split_corpus: corpus too small");
    if (!(test_ratio > 0.0 && test_ratio < 1.0))
        throw std::invalid_argument("split_corpus: test_ratio must be in (0,1)");

    const std::size_t want_test =
        static_cast<std::size_t>(std::llround(test_ratio * static_cast<double>(corpus.size())));

    // Group utterance indices by LM class, preserving corpus order.
    std::map<LMClassId, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < corpus.size(); ++i)
        groups[classify_context(corpus[i].context)].push_back(i);

    // Largest-remainder allocation of the test quota across classes.
    struct Alloc { LMClassId cls; std::size_t n; std::size_t take; double frac; };
    std::vector<Alloc> allocs;
    std::size_t assigned = 0;
    for (const auto& [cls, idxs] : groups) {
        double exact = test_ratio * static_cast<double>(idxs.size());
        std::size_t base = static_cast<std::size_t>(exact);
        base = std::min(base, idxs.size());
        allocs.push_back({cls, idxs.size(), base, exact - static_cast<double>(base)});
        assigned += base;
    }
    std::sort(allocs.begin(), allocs.end(), [](const Alloc& a, const Alloc& b) {
        if (a.frac != b.frac) return a.frac > b.frac;
        return a.cls < b.cls;
    });
    for (auto& a : allocs) {
        if (assigned >= want_test) break;
        if (a.take < a.n) { ++a.take; ++assigned; }
    }

    CorpusSplit split;
    split.seed = seed;
    std::vector<bool> in_test(corpus.size(), false);
    for (const auto& a : allocs) {
        auto idxs = groups[a.cls];
        auto rng = make_rng(seed, std::string("split/") + std::string(to_string(a.cls)));
        std::shuffle(idxs.begin(), idxs.end(), rng);
        for (std::size_t k = 0; k < a.take; ++k) in_test[idxs[k]] = true;
        if (a.take == a.n)
            split.warnings.push_back("stratification: class '" + std::string(to_string(a.cls)) +
                                     "' has no training rows");
    }
    for (std::size_t i = 0; i < corpus.size(); ++i)
        (in_test[i] ? split.test : split.train).push_back(corpus[i]);
    return split;
}

// Corpus file format: one utterance per line,
//   id<TAB>act<TAB>param1,param2<TAB>slot=value;slot=value<TAB>token token token
inline std::string utterance_to_line(const Utterance& u) {
    std::string params;
    for (std::size_t i = 0; i < u.context.params.size(); ++i) {
        if (i) params.push_back(',');
        params += to_string(u.context.params[i]);
    }
    std::string out = u.id;
    out.push_back('\t');
    out += to_string(u.context.act);
    out.push_back('\t');
    out += params;
    out.push_back('\t');
    out += frame_to_string(u.ref_frame);
    out.push_back('\t');
    out += join_tokens(u.tokens);
    return out;
}

inline Utterance utterance_from_line(const std::string& line) {
    std::vector<std::string> cols;
    std::size_t pos = 0;
    while (cols.size() < 4) {
        std::size_t tab = line.find('\t', pos);
        if (tab == std::string::npos) throw std::invalid_argument("corpus line: expected 5 columns");
        cols.push_back(line.substr(pos, tab - pos));
        pos = tab + 1;
    }
    cols.push_back(line.substr(pos));

    Utterance u;
    u.id = cols[0];
    auto act = parse_dialogue_act(cols[1]);
    if (!act) throw std::invalid_argument("corpus line: bad dialogue act '" + cols[1] + "'");
    u.context.act = *act;
    std::stringstream ps(cols[2]);
    std::string p;
    while (std::getline(ps, p, ',')) {
        auto param = parse_task_parameter(p);
        if (!param) throw std::invalid_argument("corpus line: bad task parameter '" + p + "'");
        u.context.params.push_back(*param);
    }
    if (u.context.params.empty())
        throw std::invalid_argument("corpus line: context needs at least one parameter");
    u.ref_frame = frame_from_string(cols[3]);
    std::stringstream ts(cols[4]);
    std::string tok;
    while (ts >> tok) u.tokens.push_back(tok);
    if (u.tokens.empty()) throw std::invalid_argument("corpus line: empty token sequence");
    return u;
}

inline void save_corpus(const Corpus& corpus, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    for (const auto& u : corpus) out << utterance_to_line(u) << '\n';
}

inline Corpus load_corpus(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open: " + path);
    Corpus corpus;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        corpus.push_back(utterance_from_line(line));
    }
    return corpus;
}

}  // namespace ctxlm

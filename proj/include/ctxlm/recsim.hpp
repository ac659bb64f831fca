#pragma once

// Simulated noisy-channel recognizer: n-best hypothesis generation from a
// reference utterance under a confusion table, language-model rescoring,
// and word accuracy.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "ctxlm/classlm.hpp"
#include "ctxlm/corpus.hpp"
#include "ctxlm/rng.hpp"
#include "ctxlm/semantics.hpp"

namespace ctxlm {

struct ConfusionEntry {
    std::vector<Token> alternative;  // replacement sequence (may be multi-token)
    double cost = 1.0;               // >= 0
};

struct ConfusionTable {
    // Keyed by a space-joined source phrase of one to three tokens.
    std::map<std::string, std::vector<ConfusionEntry>> entries;
    double deletion_cost = 2.0;
    double insertion_cost = 2.0;
};

struct Hypothesis {
    std::vector<Token> tokens;
    double acoustic_score = 0.0;  // log domain, higher is better
};

struct NBestList {
    Utterance reference;
    std::vector<Hypothesis> hypotheses;  // sorted by acoustic_score descending
};

// Confusion table file: `source phrase<TAB>alternative tokens<TAB>cost`.
inline ConfusionTable load_confusion_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open: " + path);
    ConfusionTable table;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::size_t t1 = line.find('\t');
        std::size_t t2 = t1 == std::string::npos ? std::string::npos : line.find('\t', t1 + 1);
        if (t2 == std::string::npos)
            throw std::runtime_error("confusion table: expected 3 columns: " + line);
        ConfusionEntry e;
        std::istringstream alts(line.substr(t1 + 1, t2 - t1 - 1));
        std::string tok;
        while (alts >> tok) e.alternative.push_back(tok);
        e.cost = std::stod(line.substr(t2 + 1));
        table.entries[line.substr(0, t1)].push_back(std::move(e));
    }
    return table;
}

inline void save_confusion_table(const ConfusionTable& table, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    for (const auto& [src, alts] : table.entries)
        for (const auto& e : alts) {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%g", e.cost);
            out << src << '\t' << join_tokens(e.alternative) << '\t' << buf << '\n';
        }
}

// Default confusability fixture: the alessandria / alle sette / a lecce
// triple, the mila-/no split, and systematic neighbor confusions between
// station names and time words so that context carries real signal.
inline ConfusionTable default_confusion_table(const SemanticLexicon& lex) {
    ConfusionTable t;
    auto add = [&](const std::string& src, std::vector<Token> alt, double cost) {
        t.entries[src].push_back({std::move(alt), cost});
    };
    add("alle sette", {"alessandria"}, 0.5);
    add("alle sette", {"a", "lecce"}, 0.5);
    add("alessandria", {"alle", "sette"}, 0.5);
    add("alessandria", {"a", "lecce"}, 0.5);
    add("a lecce", {"alessandria"}, 0.5);
    add("a lecce", {"alle", "sette"}, 0.5);
    add("milano", {"no", "milano"}, 0.6);

    std::vector<Token> stations(lex.stations.begin(), lex.stations.end());
    std::vector<Token> hours;
    for (const auto& [w, v] : lex.hour_words) hours.push_back(w);
    std::vector<Token> dates;
    for (const auto& [w, v] : lex.date_words) dates.push_back(w);

    // Within-category neighbors and cross-category confusions are kept
    // acoustically comparable: cross-category errors are the ones a
    // context-dependent model can veto, so they must reach the n-best.
    for (std::size_t i = 0; i < stations.size(); ++i) {
        add(stations[i], {stations[(i + 1) % stations.size()]}, 0.7);
        add(stations[i], {stations[(i + stations.size() - 1) % stations.size()]}, 0.8);
        add(stations[i], {hours[i % hours.size()]}, 0.7);
        add(stations[i], {dates[i % dates.size()]}, 0.75);
    }
    for (std::size_t i = 0; i < hours.size(); ++i) {
        add(hours[i], {hours[(i + 1) % hours.size()]}, 0.7);
        add(hours[i], {stations[i % stations.size()]}, 0.7);
        add(hours[i], {dates[i % dates.size()]}, 0.75);
    }
    for (std::size_t i = 0; i < dates.size(); ++i) {
        add(dates[i], {dates[(i + 1) % dates.size()]}, 0.7);
        add(dates[i], {stations[(i + 3) % stations.size()]}, 0.7);
        add(dates[i], {hours[i % hours.size()]}, 0.75);
    }
    add("yes", {"lecce"}, 0.9);
    add("no", {"como"}, 0.9);
    add("sera", {"verona"}, 0.8);
    add("evening", {"seven"}, 0.9);
    add("morning", {"monday"}, 0.9);
    return t;
}

namespace detail {

struct Edit {
    std::size_t position = 0;
    std::size_t span = 1;  // source tokens consumed (0 for insertions)
    enum Kind { Substitute, Delete, Insert } kind = Substitute;
    std::vector<Token> replacement;
    double cost = 0.0;
};

inline bool edits_overlap(const Edit& a, const Edit& b) {
    const std::size_t a_end = a.position + std::max<std::size_t>(a.span, 1);
    const std::size_t b_end = b.position + std::max<std::size_t>(b.span, 1);
    return a.position < b_end && b.position < a_end;
}

inline std::vector<Token> apply_edits(const std::vector<Token>& ref,
                                      std::vector<const Edit*> edits) {
    std::sort(edits.begin(), edits.end(),
              [](const Edit* a, const Edit* b) { return a->position < b->position; });
    std::vector<Token> out;
    std::size_t i = 0;
    std::size_t next = 0;
    while (i <= ref.size()) {
        if (next < edits.size() && edits[next]->position == i) {
            const Edit* e = edits[next++];
            for (const auto& t : e->replacement) out.push_back(t);
            i += e->span;
            continue;
        }
        if (i == ref.size()) break;
        out.push_back(ref[i++]);
    }
    return out;
}

}  // namespace detail

// Deterministic per (ref, table, n, noise, seed). Hypotheses are edit
// neighborhoods of the reference; acoustic_score = -(total confusion
// cost) + noise-scaled perturbation, so at noise 0 the reference is
// always the acoustic 1-best with score 0.
inline NBestList generate_nbest(const Utterance& ref, const ConfusionTable& table, std::size_t n,
                                double noise, std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("generate_nbest: n must be >= 1");
    auto rng = make_rng(mix_seed(seed, "nbest"), ref.id);
    std::normal_distribution<double> gauss(0.0, 1.0);

    // Single-edit inventory around the reference.
    std::vector<detail::Edit> edits;
    std::vector<Token> insertables;
    for (std::size_t i = 0; i < ref.tokens.size(); ++i) {
        for (std::size_t span = 1; span <= 3 && i + span <= ref.tokens.size(); ++span) {
            std::string key = ref.tokens[i];
            for (std::size_t k = 1; k < span; ++k) {
                key.push_back(' ');
                key += ref.tokens[i + k];
            }
            auto it = table.entries.find(key);
            if (it == table.entries.end()) continue;
            for (const auto& alt : it->second) {
                edits.push_back({i, span, detail::Edit::Substitute, alt.alternative, alt.cost});
                for (const auto& t : alt.alternative) insertables.push_back(t);
            }
        }
        if (ref.tokens.size() > 1)
            edits.push_back({i, 1, detail::Edit::Delete, {}, table.deletion_cost});
    }
    if (!insertables.empty()) {
        std::sort(insertables.begin(), insertables.end());
        std::uniform_int_distribution<std::size_t> pick_tok(0, insertables.size() - 1);
        std::uniform_int_distribution<std::size_t> pick_pos(0, ref.tokens.size());
        for (int k = 0; k < 2; ++k)
            edits.push_back({pick_pos(rng), 0, detail::Edit::Insert,
                             {insertables[pick_tok(rng)]}, table.insertion_cost});
    }

    struct Cand {
        std::vector<Token> tokens;
        double cost;
    };
    std::vector<Cand> cands;
    std::set<std::string> seen;
    auto add = [&](std::vector<Token> toks, double cost) {
        if (toks.empty()) return;
        std::string key = join_tokens(toks, '\x1f');
        if (!seen.insert(key).second) return;
        cands.push_back({std::move(toks), cost});
    };
    add(ref.tokens, 0.0);
    for (const auto& e : edits) add(detail::apply_edits(ref.tokens, {&e}), e.cost);
    // Pairs of non-overlapping edits widen the neighborhood.
    for (std::size_t i = 0; i < edits.size() && cands.size() < 4 * n; ++i)
        for (std::size_t j = i + 1; j < edits.size() && cands.size() < 4 * n; ++j) {
            if (detail::edits_overlap(edits[i], edits[j])) continue;
            add(detail::apply_edits(ref.tokens, {&edits[i], &edits[j]}),
                edits[i].cost + edits[j].cost);
        }

    NBestList out;
    out.reference = ref;
    for (auto& c : cands)
        out.hypotheses.push_back({std::move(c.tokens), -c.cost + noise * 2.0 * gauss(rng)});
    std::stable_sort(out.hypotheses.begin(), out.hypotheses.end(),
                     [](const Hypothesis& a, const Hypothesis& b) {
                         return a.acoustic_score > b.acoustic_score;
                     });
    if (out.hypotheses.size() > n) out.hypotheses.resize(n);
    return out;
}

using SentenceScorer = std::function<double(const std::vector<Token>&)>;

inline SentenceScorer make_scorer(std::shared_ptr<const ClassNGramModel> model) {
    return [model](const std::vector<Token>& toks) { return sentence_logprob(*model, toks); };
}

// combined(h) = acoustic_score(h) + lambda * trigram_logprob(h); ties go
// to the higher bigram log probability, then to input order.
inline Hypothesis rescore(const NBestList& nbest, const SentenceScorer& bigram,
                          const SentenceScorer& trigram, double lambda) {
    if (nbest.hypotheses.empty()) throw std::invalid_argument("rescore: empty n-best list");
    std::size_t best = 0;
    double best_combined = -std::numeric_limits<double>::infinity();
    double best_bigram = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < nbest.hypotheses.size(); ++i) {
        const auto& h = nbest.hypotheses[i];
        double combined = h.acoustic_score + (lambda > 0.0 ? lambda * trigram(h.tokens) : 0.0);
        if (combined > best_combined) {
            best = i;
            best_combined = combined;
            best_bigram = bigram(h.tokens);
        } else if (combined == best_combined) {
            double bg = bigram(h.tokens);
            if (bg > best_bigram) {
                best = i;
                best_bigram = bg;
            }
        }
    }
    return nbest.hypotheses[best];
}

struct EditCounts {
    std::uint64_t substitutions = 0;
    std::uint64_t deletions = 0;
    std::uint64_t insertions = 0;
    std::uint64_t total() const { return substitutions + deletions + insertions; }
};

// Minimum-edit alignment with unit costs.
inline EditCounts align_edits(const std::vector<Token>& hyp, const std::vector<Token>& ref) {
    const std::size_t n = ref.size(), m = hyp.size();
    std::vector<std::vector<std::uint32_t>> d(n + 1, std::vector<std::uint32_t>(m + 1, 0));
    for (std::size_t i = 0; i <= n; ++i) d[i][0] = static_cast<std::uint32_t>(i);
    for (std::size_t j = 0; j <= m; ++j) d[0][j] = static_cast<std::uint32_t>(j);
    for (std::size_t i = 1; i <= n; ++i)
        for (std::size_t j = 1; j <= m; ++j) {
            std::uint32_t sub = d[i - 1][j - 1] + (ref[i - 1] == hyp[j - 1] ? 0 : 1);
            d[i][j] = std::min({sub, d[i - 1][j] + 1, d[i][j - 1] + 1});
        }
    EditCounts c;
    std::size_t i = n, j = m;
    while (i > 0 || j > 0) {
        if (i > 0 && j > 0 && d[i][j] == d[i - 1][j - 1] + (ref[i - 1] == hyp[j - 1] ? 0 : 1)) {
            if (ref[i - 1] != hyp[j - 1]) ++c.substitutions;
            --i;
            --j;
        } else if (i > 0 && d[i][j] == d[i - 1][j] + 1) {
            ++c.deletions;
            --i;
        } else {
            ++c.insertions;
            --j;
        }
    }
    return c;
}

// WA = (N - S - D - I) / N with N = |ref|; can be negative under many
// insertions.
inline double word_accuracy(const std::vector<Token>& hyp, const std::vector<Token>& ref) {
    if (ref.empty()) throw std::invalid_argument("word_accuracy: empty reference");
    EditCounts c = align_edits(hyp, ref);
    return (static_cast<double>(ref.size()) - static_cast<double>(c.total())) /
           static_cast<double>(ref.size());
}

inline std::string nbest_to_text(const NBestList& nbest) {
    std::ostringstream out;
    out << "# ref " << nbest.reference.id << ": " << join_tokens(nbest.reference.tokens) << '\n';
    for (const auto& h : nbest.hypotheses) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.6f", h.acoustic_score);
        out << buf << '\t' << join_tokens(h.tokens) << '\n';
    }
    return out.str();
}

}  // namespace ctxlm

#pragma once

// Maximum-likelihood word clustering via the exchange algorithm. Words
// move between classes while the class-bigram training likelihood
//   LL = sum f(N(c1,c2)) - 2 sum f(N(c)) + sum f(N(w)),  f(x) = x ln x
// never decreases. Boundary markers live in reserved singleton classes
// and are never clustered.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "ctxlm/corpus.hpp"

namespace ctxlm {

struct WordClassMap {
    std::uint32_t num_word_classes = 0;           // K: classes available to words (incl <unk>)
    std::vector<std::uint32_t> assignment;        // vocab id -> class id
    std::uint32_t bos_class = 0;                  // = K
    std::uint32_t eos_class = 0;                  // = K + 1

    std::uint32_t total_classes() const { return num_word_classes + 2; }
    std::uint32_t class_of(std::uint32_t word_id) const { return assignment[word_id]; }
};

// One class per word; boundary markers keep their reserved classes.
inline WordClassMap identity_classmap(const Vocabulary& vocab) {
    WordClassMap m;
    m.num_word_classes = vocab.size() - 2;
    m.assignment.resize(vocab.size());
    std::uint32_t next = 0;
    for (std::uint32_t w = 0; w < vocab.size(); ++w) {
        if (w == vocab.bos_id || w == vocab.eos_id) continue;
        m.assignment[w] = next++;
    }
    m.bos_class = m.num_word_classes;
    m.eos_class = m.num_word_classes + 1;
    m.assignment[vocab.bos_id] = m.bos_class;
    m.assignment[vocab.eos_id] = m.eos_class;
    return m;
}

struct ClusterStats {
    std::vector<std::vector<std::uint64_t>> bigram;  // N(c1,c2)
    std::vector<std::uint64_t> cls;                  // N(c)
    std::vector<std::uint64_t> word;                 // N(w), boundary markers included
    std::uint64_t total = 0;                         // N, boundary markers included
    std::uint64_t sentences = 0;
};

// Counting convention: each sentence contributes the chain
// bos w1 ... wn eos, so bigrams include bos->first and last->eos and
// sum(N(c1,c2)) = N - #sentences.
inline ClusterStats build_cluster_stats(const Corpus& corpus, const Vocabulary& vocab,
                                        const WordClassMap& map) {
    ClusterStats st;
    const std::uint32_t C = map.total_classes();
    st.bigram.assign(C, std::vector<std::uint64_t>(C, 0));
    st.cls.assign(C, 0);
    st.word.assign(vocab.size(), 0);
    for (const auto& u : corpus) {
        ++st.sentences;
        std::vector<std::uint32_t> ids;
        ids.push_back(vocab.bos_id);
        for (const auto& t : u.tokens) ids.push_back(vocab.lookup(t));
        ids.push_back(vocab.eos_id);
        for (std::size_t i = 0; i < ids.size(); ++i) {
            ++st.word[ids[i]];
            ++st.cls[map.class_of(ids[i])];
            ++st.total;
            if (i + 1 < ids.size()) ++st.bigram[map.class_of(ids[i])][map.class_of(ids[i + 1])];
        }
    }
    return st;
}

namespace detail {
inline double xlnx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }
inline double xlnx(std::uint64_t x) { return xlnx(static_cast<double>(x)); }
}  // namespace detail

inline double class_log_likelihood(const ClusterStats& st) {
    std::uint64_t sum_c = 0, sum_w = 0, sum_cc = 0;
    for (auto n : st.cls) sum_c += n;
    for (auto n : st.word) sum_w += n;
    for (const auto& row : st.bigram)
        for (auto n : row) sum_cc += n;
    if (sum_c != st.total || sum_w != st.total || sum_cc + st.sentences != st.total)
        throw std::invalid_argument("class_log_likelihood: inconsistent stats");

    double ll = 0.0;
    for (const auto& row : st.bigram)
        for (auto n : row) ll += detail::xlnx(n);
    for (auto n : st.cls) ll -= 2.0 * detail::xlnx(n);
    for (auto n : st.word) ll += detail::xlnx(n);
    return ll;
}

struct ClusterResult {
    WordClassMap map;
    std::vector<double> ll_trace;  // objective after init and after each accepted move
    std::size_t sweeps = 0;
};

// Greedy exchange clustering. Initialization puts the K-1 most frequent
// words in singleton classes and the remainder in class K-1; sweeps move
// each word to the class with the best likelihood gain until a sweep
// makes no move or max_sweeps is reached. Ties keep the current class.
inline ClusterResult cluster_words_detailed(const Corpus& corpus, const Vocabulary& vocab,
                                            std::uint32_t K, std::size_t max_sweeps = 50,
                                            std::uint64_t seed = 0) {
    (void)seed;  // initialization is frequency-based and deterministic
    const std::uint32_t clusterable = vocab.size() - 2;
    if (K < 1 || K > clusterable)
        throw std::invalid_argument("cluster_words: K must be in [1, |V|]");
    if (corpus.empty()) throw std::invalid_argument("cluster_words: empty corpus");

    // Word frequencies over the bos/eos-padded chains.
    std::vector<std::uint64_t> freq(vocab.size(), 0);
    std::vector<std::vector<std::uint32_t>> sentences;
    for (const auto& u : corpus) {
        std::vector<std::uint32_t> ids;
        ids.push_back(vocab.bos_id);
        for (const auto& t : u.tokens) ids.push_back(vocab.lookup(t));
        ids.push_back(vocab.eos_id);
        for (auto id : ids) ++freq[id];
        sentences.push_back(std::move(ids));
    }

    // Clusterable words ordered by frequency desc, then surface asc.
    std::vector<std::uint32_t> order;
    for (std::uint32_t w = 0; w < vocab.size(); ++w)
        if (w != vocab.bos_id && w != vocab.eos_id) order.push_back(w);
    std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
        if (freq[a] != freq[b]) return freq[a] > freq[b];
        return vocab.entries[a] < vocab.entries[b];
    });

    WordClassMap map;
    map.num_word_classes = K;
    map.bos_class = K;
    map.eos_class = K + 1;
    map.assignment.resize(vocab.size());
    map.assignment[vocab.bos_id] = map.bos_class;
    map.assignment[vocab.eos_id] = map.eos_class;
    for (std::size_t i = 0; i < order.size(); ++i)
        map.assignment[order[i]] = static_cast<std::uint32_t>(std::min<std::size_t>(i, K - 1));

    // Word-bigram adjacency.
    std::unordered_map<std::uint64_t, std::uint64_t> wbig;
    auto pack = [](std::uint32_t a, std::uint32_t b) {
        return (static_cast<std::uint64_t>(a) << 32) | b;
    };
    for (const auto& ids : sentences)
        for (std::size_t i = 0; i + 1 < ids.size(); ++i) ++wbig[pack(ids[i], ids[i + 1])];
    std::vector<std::vector<std::pair<std::uint32_t, std::uint64_t>>> succ(vocab.size()),
        pred(vocab.size());
    for (const auto& [key, n] : wbig) {
        auto a = static_cast<std::uint32_t>(key >> 32);
        auto b = static_cast<std::uint32_t>(key & 0xffffffffu);
        succ[a].push_back({b, n});
        pred[b].push_back({a, n});
    }

    const std::uint32_t C = map.total_classes();
    std::vector<std::vector<std::int64_t>> cc(C, std::vector<std::int64_t>(C, 0));
    std::vector<std::int64_t> cn(C, 0);
    for (const auto& ids : sentences) {
        for (std::size_t i = 0; i < ids.size(); ++i) {
            ++cn[map.class_of(ids[i])];
            if (i + 1 < ids.size()) ++cc[map.class_of(ids[i])][map.class_of(ids[i + 1])];
        }
    }

    auto f = [](std::int64_t x) { return detail::xlnx(static_cast<double>(x)); };
    double ll = 0.0;
    for (std::uint32_t a = 0; a < C; ++a) {
        ll -= 2.0 * f(cn[a]);
        for (std::uint32_t b = 0; b < C; ++b) ll += f(cc[a][b]);
    }
    for (std::uint32_t w = 0; w < vocab.size(); ++w) ll += detail::xlnx(freq[w]);

    ClusterResult res;
    res.ll_trace.push_back(ll);

    std::vector<std::int64_t> pre(C), suc(C);
    std::int64_t self = 0;

    // Class-count neighborhood of w under the current assignment.
    auto gather = [&](std::uint32_t w) {
        std::fill(pre.begin(), pre.end(), 0);
        std::fill(suc.begin(), suc.end(), 0);
        self = 0;
        for (const auto& [v, n] : pred[w]) {
            if (v == w) self = static_cast<std::int64_t>(n);
            else pre[map.assignment[v]] += static_cast<std::int64_t>(n);
        }
        for (const auto& [v, n] : succ[w])
            if (v != w) suc[map.assignment[v]] += static_cast<std::int64_t>(n);
    };

    // Likelihood change of moving w (neighborhood already gathered) from
    // its current class to b.
    auto move_delta = [&](std::uint32_t w, std::uint32_t b) {
        const std::uint32_t a = map.assignment[w];
        const auto nw = static_cast<std::int64_t>(freq[w]);
        double delta = -2.0 * (f(cn[a] - nw) - f(cn[a]) + f(cn[b] + nw) - f(cn[b]));
        for (std::uint32_t d = 0; d < C; ++d) {
            if (d == a || d == b) continue;
            delta += f(cc[d][a] - pre[d]) - f(cc[d][a]);
            delta += f(cc[d][b] + pre[d]) - f(cc[d][b]);
            delta += f(cc[a][d] - suc[d]) - f(cc[a][d]);
            delta += f(cc[b][d] + suc[d]) - f(cc[b][d]);
        }
        delta += f(cc[a][a] - pre[a] - suc[a] - self) - f(cc[a][a]);
        delta += f(cc[b][b] + pre[b] + suc[b] + self) - f(cc[b][b]);
        delta += f(cc[a][b] - suc[b] + pre[a]) - f(cc[a][b]);
        delta += f(cc[b][a] - pre[b] + suc[a]) - f(cc[b][a]);
        return delta;
    };

    auto apply_move = [&](std::uint32_t w, std::uint32_t b) {
        const std::uint32_t a = map.assignment[w];
        const auto nw = static_cast<std::int64_t>(freq[w]);
        for (std::uint32_t d = 0; d < C; ++d) {
            if (d == a || d == b) continue;
            cc[d][a] -= pre[d];
            cc[d][b] += pre[d];
            cc[a][d] -= suc[d];
            cc[b][d] += suc[d];
        }
        cc[a][a] -= pre[a] + suc[a] + self;
        cc[b][b] += pre[b] + suc[b] + self;
        cc[a][b] += pre[a] - suc[b];
        cc[b][a] += suc[a] - pre[b];
        cn[a] -= nw;
        cn[b] += nw;
        map.assignment[w] = b;
    };

    for (std::size_t sweep = 0; sweep < max_sweeps; ++sweep) {
        bool moved = false;
        ++res.sweeps;
        for (std::uint32_t w : order) {
            const std::uint32_t a = map.assignment[w];
            gather(w);
            double best_delta = 0.0;
            std::uint32_t best_b = a;
            for (std::uint32_t b = 0; b < K; ++b) {
                if (b == a) continue;
                double delta = move_delta(w, b);
                if (delta > best_delta + 1e-12) {
                    best_delta = delta;
                    best_b = b;
                }
            }
            if (best_b == a || best_delta <= 1e-12) continue;
            apply_move(w, best_b);
            ll += best_delta;
            res.ll_trace.push_back(ll);
            moved = true;
        }
        if (moved) continue;

        // Single-word moves have converged. Try composite two-word moves:
        // escapes local optima where neither word improves alone but a
        // joint reassignment does. Small vocabularies get the full joint
        // search; larger ones get the cheaper class-swap special case.
        // Only net-improving composites are accepted, so the recorded
        // objective stays monotone.
        const bool full_pairs = clusterable <= 32;
        for (std::size_t i = 0; i < order.size() && !moved; ++i) {
            const std::uint32_t w1 = order[i];
            for (std::size_t j = i + 1; j < order.size() && !moved; ++j) {
                const std::uint32_t w2 = order[j];
                const std::uint32_t a1 = map.assignment[w1];
                const std::uint32_t a2 = map.assignment[w2];
                for (std::uint32_t b1 = 0; b1 < K && !moved; ++b1) {
                    if (b1 == a1) continue;
                    if (!full_pairs && b1 != a2) continue;
                    gather(w1);
                    const double d1 = move_delta(w1, b1);
                    apply_move(w1, b1);
                    gather(w2);
                    double best_d2 = -std::numeric_limits<double>::infinity();
                    std::uint32_t best_b2 = a2;
                    for (std::uint32_t b2 = 0; b2 < K; ++b2) {
                        if (b2 == a2) continue;
                        if (!full_pairs && b2 != a1) continue;
                        const double d2 = move_delta(w2, b2);
                        if (d2 > best_d2) {
                            best_d2 = d2;
                            best_b2 = b2;
                        }
                    }
                    if (best_b2 != a2 && d1 + best_d2 > 1e-12) {
                        apply_move(w2, best_b2);
                        ll += d1 + best_d2;
                        res.ll_trace.push_back(ll);
                        moved = true;
                    } else {
                        gather(w1);
                        apply_move(w1, a1);
                    }
                }
            }
        }
        if (!moved) break;
    }
    res.map = map;
    return res;
}

inline WordClassMap cluster_words(const Corpus& corpus, std::uint32_t K,
                                  std::size_t max_sweeps = 50, std::uint64_t seed = 0) {
    Vocabulary vocab = build_vocabulary(corpus);
    return cluster_words_detailed(corpus, vocab, K, max_sweeps, seed).map;
}

// Re-expresses a class map over a different (typically smaller)
// vocabulary: each word keeps the class it has in the global map, words
// unknown to the global vocabulary share the <unk> class.
inline WordClassMap project_classmap(const Vocabulary& global_vocab,
                                     const WordClassMap& global_map,
                                     const Vocabulary& sub_vocab) {
    WordClassMap m;
    m.num_word_classes = global_map.num_word_classes;
    m.bos_class = global_map.bos_class;
    m.eos_class = global_map.eos_class;
    m.assignment.resize(sub_vocab.size());
    for (std::uint32_t w = 0; w < sub_vocab.size(); ++w) {
        if (w == sub_vocab.bos_id) m.assignment[w] = m.bos_class;
        else if (w == sub_vocab.eos_id) m.assignment[w] = m.eos_class;
        else m.assignment[w] = global_map.class_of(global_vocab.lookup(sub_vocab.entries[w]));
    }
    return m;
}

// Class map file: header `K=<int>`, then one `word<TAB>class_id` line per
// vocabulary word, sorted by word.
inline void save_classmap(const WordClassMap& map, const Vocabulary& vocab,
                          const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << "K=" << map.num_word_classes << '\n';
    std::vector<std::uint32_t> ids(vocab.size());
    for (std::uint32_t i = 0; i < vocab.size(); ++i) ids[i] = i;
    std::sort(ids.begin(), ids.end(), [&](std::uint32_t a, std::uint32_t b) {
        return vocab.entries[a] < vocab.entries[b];
    });
    for (auto id : ids) out << vocab.entries[id] << '\t' << map.assignment[id] << '\n';
}

}  // namespace ctxlm

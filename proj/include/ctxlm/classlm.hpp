#pragma once

// Word-class n-gram language model: training, sentence scoring,
// perplexity and bit-exact binary serialization. The model factors
// P(w|h) = P(w|c_w) * P(c_w | class history); class transitions are
// smoothed with interpolated Witten-Bell, emissions are ML within each
// class with a floor for <unk>.

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "ctxlm/corpus.hpp"
#include "ctxlm/wordclass.hpp"

namespace ctxlm {

enum class Smoothing : std::uint8_t { None, WittenBell };

struct ModelMeta {
    std::string lm_class_label;          // which dialogue-context class this LM serves
    std::uint64_t train_utterances = 0;
    std::uint64_t train_multiword = 0;   // training utterances longer than one token
};

struct HistoryEntry {
    double lambda = 0.0;  // weight of the ML estimate at this history
    std::vector<std::pair<std::uint32_t, double>> ml;  // class -> ML prob, sorted by class
};

struct ClassNGramModel {
    std::uint8_t order = 2;  // 2 or 3
    Vocabulary vocab;
    WordClassMap classes;
    Smoothing smoothing = Smoothing::WittenBell;
    double unk_floor = 1e-6;
    ModelMeta meta;

    std::vector<double> emission_log;  // per word, ln P(w | class(w))
    HistoryEntry unigram;              // class distribution over transition targets
    // levels[k]: histories of length k+1 (most recent class last in packing)
    std::vector<std::map<std::uint64_t, HistoryEntry>> levels;

    std::uint32_t transition_targets() const { return classes.total_classes() - 1; }

    std::uint64_t pack_history(const std::uint32_t* hist, std::size_t len) const {
        std::uint64_t key = 0;
        for (std::size_t i = 0; i < len; ++i)
            key = key * classes.total_classes() + hist[i] + 1;
        return key;
    }

    static double ml_lookup(const HistoryEntry& e, std::uint32_t cls) {
        for (const auto& [c, p] : e.ml)
            if (c == cls) return p;
        return 0.0;
    }

    // P(cls | hist) with Witten-Bell interpolation down to a uniform
    // distribution over the transition targets (every class except bos).
    double transition_prob(const std::uint32_t* hist, std::size_t len, std::uint32_t cls) const {
        if (smoothing == Smoothing::None) {
            const HistoryEntry* e = find_history(hist, len);
            return e ? ml_lookup(*e, cls) : 0.0;
        }
        double p = 1.0 / static_cast<double>(transition_targets());
        p = unigram.lambda * ml_lookup(unigram, cls) + (1.0 - unigram.lambda) * p;
        for (std::size_t k = 1; k <= len; ++k) {
            const std::uint32_t* h = hist + (len - k);
            const HistoryEntry* e = find_history(h, k);
            if (!e) continue;  // unseen history: lambda 0, keep backoff value
            p = e->lambda * ml_lookup(*e, cls) + (1.0 - e->lambda) * p;
        }
        return p;
    }

    const HistoryEntry* find_history(const std::uint32_t* hist, std::size_t len) const {
        if (len == 0 || len > levels.size()) return nullptr;
        const auto& m = levels[len - 1];
        auto it = m.find(pack_history(hist, len));
        return it == m.end() ? nullptr : &it->second;
    }
};

struct PerplexityReport {
    double pp = 0.0;
    std::uint64_t token_count = 0;  // counts eos, not bos
    double total_logprob = 0.0;
    std::uint64_t oov_count = 0;
};

inline ClassNGramModel train_class_ngram(const Corpus& corpus, const Vocabulary& vocab,
                                         const WordClassMap& classmap, int order,
                                         Smoothing smoothing = Smoothing::WittenBell,
                                         double unk_floor = 1e-6,
                                         const std::string& lm_class_label = "") {
    if (corpus.empty())
        throw std::invalid_argument("train: corpus insufficient to train a reliable LM");
    if (order != 2 && order != 3) throw std::invalid_argument("train: order must be 2 or 3");
    if (classmap.assignment.size() != vocab.size())
        throw std::invalid_argument("train: class map does not cover the vocabulary");

    ClassNGramModel m;
    m.order = static_cast<std::uint8_t>(order);
    m.vocab = vocab;
    m.classes = classmap;
    m.smoothing = smoothing;
    m.unk_floor = unk_floor;
    m.meta.lm_class_label = lm_class_label;

    const std::uint32_t C = classmap.total_classes();

    // Count emissions, class unigrams (target side) and histories.
    std::vector<std::uint64_t> word_count(vocab.size(), 0);
    std::vector<std::uint64_t> class_member_count(C, 0);
    std::vector<std::uint64_t> target_count(C, 0);
    std::uint64_t target_total = 0;
    std::vector<std::map<std::uint64_t, std::map<std::uint32_t, std::uint64_t>>> hist_counts(
        static_cast<std::size_t>(order - 1));

    const std::size_t ctx = static_cast<std::size_t>(order - 1);
    for (const auto& u : corpus) {
        m.meta.train_utterances++;
        if (u.tokens.size() > 1) m.meta.train_multiword++;
        std::vector<std::uint32_t> cls;
        std::vector<std::uint32_t> ids;
        for (std::size_t i = 0; i < ctx; ++i) {
            ids.push_back(vocab.bos_id);
            cls.push_back(classmap.bos_class);
        }
        for (const auto& t : u.tokens) {
            ids.push_back(vocab.lookup(t));
            cls.push_back(classmap.class_of(ids.back()));
        }
        ids.push_back(vocab.eos_id);
        cls.push_back(classmap.eos_class);

        for (std::size_t i = ctx; i < ids.size(); ++i) {
            ++word_count[ids[i]];
            ++target_count[cls[i]];
            ++target_total;
            for (std::size_t k = 1; k <= ctx; ++k) {
                std::uint64_t key = m.pack_history(&cls[i - k], k);
                ++hist_counts[k - 1][key][cls[i]];
            }
        }
    }
    for (std::uint32_t w = 0; w < vocab.size(); ++w)
        class_member_count[classmap.class_of(w)] += word_count[w];

    // Emissions: ML within class; a zero-count <unk> gets a floor and the
    // rest of its class is renormalized.
    m.emission_log.assign(vocab.size(), -std::numeric_limits<double>::infinity());
    const std::uint32_t unk_cls = classmap.class_of(vocab.unk_id);
    for (std::uint32_t w = 0; w < vocab.size(); ++w) {
        const std::uint32_t c = classmap.class_of(w);
        if (w == vocab.bos_id || w == vocab.eos_id) {
            m.emission_log[w] = 0.0;  // singleton reserved classes
            continue;
        }
        const std::uint64_t total = class_member_count[c];
        if (w == vocab.unk_id && word_count[w] == 0) {
            if (total == 0) {
                m.emission_log[w] = 0.0;  // <unk> alone in an unseen class
            } else {
                m.emission_log[w] = std::log(unk_floor);
            }
            continue;
        }
        if (total == 0 || word_count[w] == 0) continue;  // stays -inf, emission prob 0
        double p = static_cast<double>(word_count[w]) / static_cast<double>(total);
        if (c == unk_cls && word_count[vocab.unk_id] == 0 && class_member_count[c] > 0)
            p *= 1.0 - unk_floor;  // leave room for the floored <unk>
        m.emission_log[w] = std::log(p);
    }

    // Unigram transition distribution over targets.
    {
        std::uint32_t distinct = 0;
        for (std::uint32_t c = 0; c < C; ++c)
            if (target_count[c] > 0) ++distinct;
        m.unigram.lambda = static_cast<double>(target_total) /
                           static_cast<double>(target_total + distinct);
        for (std::uint32_t c = 0; c < C; ++c)
            if (target_count[c] > 0)
                m.unigram.ml.push_back({c, static_cast<double>(target_count[c]) /
                                               static_cast<double>(target_total)});
    }

    // Per-history ML distributions and Witten-Bell weights.
    m.levels.resize(static_cast<std::size_t>(order - 1));
    for (std::size_t k = 0; k < m.levels.size(); ++k) {
        for (const auto& [key, targets] : hist_counts[k]) {
            std::uint64_t n = 0;
            for (const auto& [c, cnt] : targets) n += cnt;
            HistoryEntry e;
            e.lambda = static_cast<double>(n) / static_cast<double>(n + targets.size());
            for (const auto& [c, cnt] : targets)
                e.ml.push_back({c, static_cast<double>(cnt) / static_cast<double>(n)});
            m.levels[k].emplace(key, std::move(e));
        }
    }
    return m;
}

inline ClassNGramModel train_class_ngram(const Corpus& corpus, const WordClassMap& classmap,
                                         int order, Smoothing smoothing = Smoothing::WittenBell,
                                         double unk_floor = 1e-6,
                                         const std::string& lm_class_label = "") {
    return train_class_ngram(corpus, build_vocabulary(corpus), classmap, order, smoothing,
                             unk_floor, lm_class_label);
}

// Natural-log probability of the bos-padded, eos-terminated sequence.
// Unknown words map to <unk>. May be -inf for an unsmoothed model on
// unseen events.
inline double sentence_logprob(const ClassNGramModel& m, const std::vector<Token>& tokens) {
    const std::size_t ctx = static_cast<std::size_t>(m.order - 1);
    std::vector<std::uint32_t> cls;
    std::vector<std::uint32_t> ids;
    for (std::size_t i = 0; i < ctx; ++i) {
        ids.push_back(m.vocab.bos_id);
        cls.push_back(m.classes.bos_class);
    }
    for (const auto& t : tokens) {
        ids.push_back(m.vocab.lookup(t));
        cls.push_back(m.classes.class_of(ids.back()));
    }
    ids.push_back(m.vocab.eos_id);
    cls.push_back(m.classes.eos_class);

    double lp = 0.0;
    for (std::size_t i = ctx; i < ids.size(); ++i) {
        double pt = m.transition_prob(&cls[i - ctx], ctx, cls[i]);
        if (pt <= 0.0) return -std::numeric_limits<double>::infinity();
        lp += std::log(pt) + m.emission_log[ids[i]];
        if (std::isinf(lp)) return -std::numeric_limits<double>::infinity();
    }
    return lp;
}

inline std::uint64_t count_oov(const ClassNGramModel& m, const std::vector<Token>& tokens) {
    std::uint64_t n = 0;
    for (const auto& t : tokens)
        if (!m.vocab.contains(t)) ++n;
    return n;
}

inline PerplexityReport perplexity(const ClassNGramModel& m, const Corpus& testset) {
    if (testset.empty()) throw std::invalid_argument("perplexity: empty test set");
    PerplexityReport r;
    for (const auto& u : testset) {
        r.total_logprob += sentence_logprob(m, u.tokens);
        r.token_count += u.tokens.size() + 1;  // eos counted, bos not
        r.oov_count += count_oov(m, u.tokens);
    }
    r.pp = std::exp(-r.total_logprob / static_cast<double>(r.token_count));
    return r;
}

// --- binary serialization -------------------------------------------------
//
// Magic "CTXLM1", then a self-describing header and the tables; integers
// fixed-width little-endian, probabilities as raw 64-bit doubles so that
// a round trip reproduces bit-identical scores.

namespace io {

class ByteWriter {
  public:
    void u8(std::uint8_t v) { bytes_.push_back(static_cast<char>(v)); }
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) bytes_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
    }
    void u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) bytes_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
    }
    void f64(double v) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, 8);
        u64(bits);
    }
    void str(const std::string& s) {
        u32(static_cast<std::uint32_t>(s.size()));
        bytes_.append(s);
    }
    void raw(const char* data, std::size_t n) { bytes_.append(data, n); }
    const std::string& bytes() const { return bytes_; }

  private:
    std::string bytes_;
};

class ByteReader {
  public:
    explicit ByteReader(std::string_view data) : data_(data) {}

    std::uint8_t u8() { return static_cast<std::uint8_t>(take(1)[0]); }
    std::uint32_t u32() {
        auto s = take(4);
        std::uint32_t v = 0;
        for (int i = 3; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(s[i]);
        return v;
    }
    std::uint64_t u64() {
        auto s = take(8);
        std::uint64_t v = 0;
        for (int i = 7; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(s[i]);
        return v;
    }
    double f64() {
        std::uint64_t bits = u64();
        double v;
        std::memcpy(&v, &bits, 8);
        return v;
    }
    std::string str() {
        std::uint32_t n = u32();
        return std::string(take(n));
    }
    std::string_view take(std::size_t n) {
        if (pos_ + n > data_.size())
            throw std::runtime_error("deserialize: truncated stream at byte offset " +
                                     std::to_string(pos_));
        std::string_view out = data_.substr(pos_, n);
        pos_ += n;
        return out;
    }
    std::size_t offset() const { return pos_; }
    bool at_end() const { return pos_ == data_.size(); }

  private:
    std::string_view data_;
    std::size_t pos_ = 0;
};

}  // namespace io

inline constexpr char kModelMagic[6] = {'C', 'T', 'X', 'L', 'M', '1'};
inline constexpr std::uint32_t kModelVersion = 1;

inline void write_history_entry(io::ByteWriter& w, const HistoryEntry& e) {
    w.f64(e.lambda);
    w.u32(static_cast<std::uint32_t>(e.ml.size()));
    for (const auto& [c, p] : e.ml) {
        w.u32(c);
        w.f64(p);
    }
}

inline HistoryEntry read_history_entry(io::ByteReader& r) {
    HistoryEntry e;
    e.lambda = r.f64();
    std::uint32_t n = r.u32();
    e.ml.reserve(n);
    for (std::uint32_t i = 0; i < n; ++i) {
        std::uint32_t c = r.u32();
        double p = r.f64();
        e.ml.push_back({c, p});
    }
    return e;
}

inline std::string serialize_model(const ClassNGramModel& m) {
    io::ByteWriter w;
    w.raw(kModelMagic, 6);
    w.u32(kModelVersion);
    w.u8(m.order);
    w.u8(static_cast<std::uint8_t>(m.smoothing));
    w.f64(m.unk_floor);
    w.str(m.meta.lm_class_label);
    w.u64(m.meta.train_utterances);
    w.u64(m.meta.train_multiword);

    w.u32(m.vocab.size());
    for (const auto& e : m.vocab.entries) w.str(e);
    w.u32(m.vocab.unk_id);
    w.u32(m.vocab.bos_id);
    w.u32(m.vocab.eos_id);

    w.u32(m.classes.num_word_classes);
    for (auto c : m.classes.assignment) w.u32(c);

    for (auto e : m.emission_log) w.f64(e);
    write_history_entry(w, m.unigram);

    w.u32(static_cast<std::uint32_t>(m.levels.size()));
    for (const auto& level : m.levels) {
        w.u64(level.size());
        for (const auto& [key, entry] : level) {
            w.u64(key);
            write_history_entry(w, entry);
        }
    }
    return w.bytes();
}

inline ClassNGramModel deserialize_model(std::string_view bytes) {
    io::ByteReader r(bytes);
    auto magic = r.take(6);
    if (std::memcmp(magic.data(), kModelMagic, 6) != 0)
        throw std::runtime_error("deserialize: bad magic at byte offset 0");
    std::uint32_t version = r.u32();
    if (version != kModelVersion)
        throw std::runtime_error("deserialize: unsupported version " + std::to_string(version) +
                                 " at byte offset 6");
    ClassNGramModel m;
    m.order = r.u8();
    m.smoothing = static_cast<Smoothing>(r.u8());
    m.unk_floor = r.f64();
    m.meta.lm_class_label = r.str();
    m.meta.train_utterances = r.u64();
    m.meta.train_multiword = r.u64();

    std::uint32_t vsize = r.u32();
    m.vocab.entries.reserve(vsize);
    for (std::uint32_t i = 0; i < vsize; ++i) m.vocab.entries.push_back(r.str());
    m.vocab.unk_id = r.u32();
    m.vocab.bos_id = r.u32();
    m.vocab.eos_id = r.u32();
    m.vocab.rebuild_index();

    m.classes.num_word_classes = r.u32();
    m.classes.bos_class = m.classes.num_word_classes;
    m.classes.eos_class = m.classes.num_word_classes + 1;
    m.classes.assignment.reserve(vsize);
    for (std::uint32_t i = 0; i < vsize; ++i) m.classes.assignment.push_back(r.u32());

    m.emission_log.reserve(vsize);
    for (std::uint32_t i = 0; i < vsize; ++i) m.emission_log.push_back(r.f64());
    m.unigram = read_history_entry(r);

    std::uint32_t nlevels = r.u32();
    m.levels.resize(nlevels);
    for (std::uint32_t k = 0; k < nlevels; ++k) {
        std::uint64_t n = r.u64();
        for (std::uint64_t i = 0; i < n; ++i) {
            std::uint64_t key = r.u64();
            m.levels[k].emplace(key, read_history_entry(r));
        }
    }
    if (!r.at_end())
        throw std::runtime_error("deserialize: trailing bytes at offset " +
                                 std::to_string(r.offset()));
    return m;
}

inline void save_model(const ClassNGramModel& m, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    const std::string bytes = serialize_model(m);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

inline ClassNGramModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return deserialize_model(ss.str());
}

}  // namespace ctxlm

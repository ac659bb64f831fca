#pragma once

// Language-model registry: every specific model plus the
// context-independent fallback, loaded once at startup; per-turn model
// switching is a constant-time table lookup with no file access.

#include <array>
#include <filesystem>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "ctxlm/classlm.hpp"
#include "ctxlm/contextmap.hpp"

namespace ctxlm {

struct LMPair {
    std::shared_ptr<const ClassNGramModel> bigram;
    std::shared_ptr<const ClassNGramModel> trigram;  // used for n-best rescoring
};

class LMRegistry {
  public:
    // Installs a model pair for one class; stats default to the pair's
    // training metadata.
    void set_models(LMClassId cls, LMPair pair, std::optional<LMClassStats> stats = {}) {
        auto idx = static_cast<std::size_t>(cls);
        models_[idx] = std::move(pair);
        if (cls != LMClassId::ContextIndependent) {
            if (stats) {
                stats_[idx] = *stats;
            } else if (models_[idx].bigram) {
                stats_[idx] = {models_[idx].bigram->meta.train_utterances,
                               models_[idx].bigram->meta.train_multiword};
            }
        }
        if (cls == LMClassId::ContextIndependent) active_ = cls;
    }

    void set_policy(RobustnessPolicy policy) { policy_ = policy; }
    const RobustnessPolicy& policy() const { return policy_; }

    bool loaded() const {
        const auto& fb = models_[static_cast<std::size_t>(LMClassId::ContextIndependent)];
        return fb.bigram != nullptr && fb.trigram != nullptr;
    }

    // Resolves the context's LM class through the robustness policy and
    // makes it active. No allocation, no I/O.
    LMClassId switch_to(const DialogueContext& ctx) {
        LMClassId cls = resolve(ctx);
        active_ = cls;
        return cls;
    }

    LMClassId resolve(const DialogueContext& ctx) const {
        LMClassId cls = effective_lm(classify_context(ctx), stats_, policy_);
        if (!models_[static_cast<std::size_t>(cls)].bigram)
            cls = LMClassId::ContextIndependent;
        return cls;
    }

    LMClassId active() const { return active_; }

    const LMPair& active_models() const { return models_[static_cast<std::size_t>(active_)]; }
    const LMPair& models_for(LMClassId cls) const {
        return models_[static_cast<std::size_t>(cls)];
    }
    const LMPair& fallback() const {
        return models_[static_cast<std::size_t>(LMClassId::ContextIndependent)];
    }

    const std::array<LMClassStats, kNumSpecificLMClasses>& stats() const { return stats_; }
    void set_stats(LMClassId cls, LMClassStats s) {
        stats_[static_cast<std::size_t>(cls)] = s;
    }

    std::uint64_t file_operations() const { return file_ops_; }
    void count_file_operation() { ++file_ops_; }

    const std::vector<std::string>& warnings() const { return warnings_; }
    void add_warning(std::string w) { warnings_.push_back(std::move(w)); }

  private:
    std::array<LMPair, kNumLMClasses> models_{};
    std::array<LMClassStats, kNumSpecificLMClasses> stats_{};
    RobustnessPolicy policy_{};
    LMClassId active_ = LMClassId::ContextIndependent;
    std::uint64_t file_ops_ = 0;
    std::vector<std::string> warnings_;
};

// Manifest format: `class-label<TAB>bigram-path<TAB>trigram-path`, one
// row per class; the context-independent row is mandatory. A corrupt or
// missing specific model degrades to the fallback with a warning; a bad
// fallback is fatal.
inline LMRegistry load_registry(const std::string& manifest_path,
                                RobustnessPolicy policy = {}) {
    std::ifstream in(manifest_path);
    if (!in) throw std::runtime_error("cannot open manifest: " + manifest_path);
    const auto base = std::filesystem::path(manifest_path).parent_path();

    LMRegistry reg;
    reg.set_policy(policy);
    std::string line;
    bool have_fallback = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::size_t t1 = line.find('\t');
        std::size_t t2 = t1 == std::string::npos ? std::string::npos : line.find('\t', t1 + 1);
        if (t2 == std::string::npos)
            throw std::runtime_error("manifest: expected 3 columns: " + line);
        std::string label = line.substr(0, t1);
        std::string bi_path = line.substr(t1 + 1, t2 - t1 - 1);
        std::string tri_path = line.substr(t2 + 1);
        auto cls = parse_lm_class(label);
        if (!cls) throw std::runtime_error("manifest: unknown class label: " + label);

        auto resolve_path = [&](const std::string& p) {
            std::filesystem::path fp(p);
            return fp.is_absolute() ? fp.string() : (base / fp).string();
        };
        try {
            reg.count_file_operation();
            auto bi = std::make_shared<ClassNGramModel>(load_model(resolve_path(bi_path)));
            reg.count_file_operation();
            auto tri = std::make_shared<ClassNGramModel>(load_model(resolve_path(tri_path)));
            reg.set_models(*cls, {std::move(bi), std::move(tri)});
            if (*cls == LMClassId::ContextIndependent) have_fallback = true;
        } catch (const std::exception& e) {
            if (*cls == LMClassId::ContextIndependent)
                throw std::runtime_error(std::string("manifest: fallback model unusable: ") +
                                         e.what());
            reg.add_warning("model for class '" + label + "' unusable (" + e.what() +
                            "), routed to fallback");
        }
    }
    if (!have_fallback)
        throw std::runtime_error("manifest: missing mandatory context-independent row");
    return reg;
}

inline void save_manifest(const std::vector<std::tuple<LMClassId, std::string, std::string>>& rows,
                          const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    for (const auto& [cls, bi, tri] : rows)
        out << to_string(cls) << '\t' << bi << '\t' << tri << '\n';
}

}  // namespace ctxlm

// Command-line front door: corpus generation, word clustering, model
// training, the context-independent vs context-dependent comparison, and
// an interactive demo session.

#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"

#include "ctxlm/classlm.hpp"
#include "ctxlm/dialog.hpp"
#include "ctxlm/eval.hpp"
#include "ctxlm/grammar.hpp"
#include "ctxlm/lexicon.hpp"
#include "ctxlm/recsim.hpp"
#include "ctxlm/registry.hpp"
#include "ctxlm/wordclass.hpp"

namespace fs = std::filesystem;
using namespace ctxlm;

namespace {

struct GlobalOpts {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out_dir = "out";
};

EvalConfig load_config(const GlobalOpts& g) {
    EvalConfig cfg;
    if (!g.config_path.empty()) {
        std::ifstream in(g.config_path);
        if (!in) throw std::runtime_error("config: cannot open " + g.config_path);
        nlohmann::json j;
        try {
            in >> j;
            cfg = j.get<EvalConfig>();
        } catch (const nlohmann::json::exception& e) {
            throw std::runtime_error("config: " + g.config_path + ": " + e.what());
        }
    }
    if (g.seed) cfg.seed = *g.seed;
    return cfg;
}

TemplateGrammar load_grammar_or_default(const std::string& path) {
    if (path.empty()) return default_grammar();
    std::ifstream in(path);
    if (!in) throw std::runtime_error("grammar: cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_grammar(ss.str());
}

void write_file_manifest(const fs::path& out_dir, const std::vector<std::string>& files) {
    std::ofstream out(out_dir / "manifest.txt", std::ios::binary);
    for (const auto& f : files) out << f << '\n';
}

int cmd_gen_corpus(const GlobalOpts& g, const std::string& grammar_path) {
    EvalConfig cfg = load_config(g);
    TemplateGrammar grammar = load_grammar_or_default(grammar_path);
    SemanticLexicon lex = default_lexicon(cfg.station_count);
    Corpus corpus = generate_synthetic_corpus(grammar, scaled_class_counts(cfg.corpus_scale),
                                              cfg.seed, lex, cfg.noise_token_prob);
    fs::create_directories(g.out_dir);
    save_corpus(corpus, (fs::path(g.out_dir) / "corpus.tsv").string());
    write_file_manifest(g.out_dir, {"corpus.tsv"});
    std::cout << "wrote " << corpus.size() << " utterances to " << g.out_dir << "/corpus.tsv\n";
    return 0;
}

int cmd_cluster_words(const GlobalOpts& g, const std::string& corpus_path,
                      const std::string& grammar_path, std::uint32_t classes) {
    EvalConfig cfg = load_config(g);
    Corpus corpus;
    if (!corpus_path.empty()) {
        corpus = load_corpus(corpus_path);
    } else {
        TemplateGrammar grammar = load_grammar_or_default(grammar_path);
        SemanticLexicon lex = default_lexicon(cfg.station_count);
        corpus = generate_synthetic_corpus(grammar, scaled_class_counts(cfg.corpus_scale),
                                           cfg.seed, lex, cfg.noise_token_prob);
    }
    Vocabulary vocab = build_vocabulary(corpus);
    auto res = cluster_words_detailed(corpus, vocab, classes, cfg.cluster_max_sweeps, cfg.seed);
    fs::create_directories(g.out_dir);
    save_classmap(res.map, vocab, (fs::path(g.out_dir) / "classmap.tsv").string());
    write_file_manifest(g.out_dir, {"classmap.tsv"});
    std::cout << "clustered |V|=" << vocab.size() - 2 << " words into K=" << classes
              << " classes in " << res.sweeps << " sweeps; objective "
              << res.ll_trace.back() << "\n";
    std::cout << "wrote " << g.out_dir << "/classmap.tsv\n";
    return 0;
}

int cmd_train(const GlobalOpts& g, const std::string& corpus_path,
              const std::string& grammar_path) {
    EvalConfig cfg = load_config(g);
    TemplateGrammar grammar = load_grammar_or_default(grammar_path);
    TrainedConditions tc = build_conditions(cfg, grammar, cfg.seed);
    if (!corpus_path.empty()) {
        // An explicit corpus replaces the generated one end to end.
        Corpus corpus = load_corpus(corpus_path);
        CorpusSplit split = split_corpus(corpus, cfg.test_ratio, cfg.seed);
        tc = TrainedConditions{};
        tc.lexicon = default_lexicon(cfg.station_count);
        tc.confusions = default_confusion_table(tc.lexicon);
        tc.train = split.train;
        tc.test = split.test;
        Vocabulary vocab = build_vocabulary(tc.train);
        WordClassMap map = cfg.num_classes > 0 && cfg.num_classes < vocab.size() - 2
                               ? cluster_words_detailed(tc.train, vocab, cfg.num_classes,
                                                        cfg.cluster_max_sweeps, cfg.seed)
                                     .map
                               : identity_classmap(vocab);
        tc.registry.set_policy({cfg.robust_min_utterances, cfg.robust_min_multiword});
        tc.registry.set_models(
            LMClassId::ContextIndependent,
            train_pair(tc.train, vocab, map, cfg,
                       std::string(to_string(LMClassId::ContextIndependent))));
        std::map<LMClassId, Corpus> by_class;
        for (const auto& u : tc.train) by_class[classify_context(u.context)].push_back(u);
        for (const auto& [cls, sub] : by_class)
            tc.registry.set_models(cls, train_pair(sub, vocab, map, cfg,
                                                   std::string(to_string(cls))));
    }

    fs::create_directories(g.out_dir);
    std::vector<std::tuple<LMClassId, std::string, std::string>> manifest_rows;
    std::vector<std::string> files;
    int idx = 0;
    for (LMClassId cls : all_lm_classes()) {
        const LMPair& pair = tc.registry.models_for(cls);
        if (!pair.bigram) continue;
        std::string stem = "lm" + std::to_string(idx++);
        std::string bi = stem + ".bigram.ctxlm", tri = stem + ".trigram.ctxlm";
        save_model(*pair.bigram, (fs::path(g.out_dir) / bi).string());
        save_model(*pair.trigram, (fs::path(g.out_dir) / tri).string());
        manifest_rows.push_back({cls, bi, tri});
        files.push_back(bi);
        files.push_back(tri);
    }
    save_manifest(manifest_rows, (fs::path(g.out_dir) / "models.manifest").string());
    save_corpus(tc.train, (fs::path(g.out_dir) / "train.tsv").string());
    save_corpus(tc.test, (fs::path(g.out_dir) / "test.tsv").string());
    files.insert(files.end(), {"models.manifest", "train.tsv", "test.tsv"});
    write_file_manifest(g.out_dir, files);
    std::cout << "trained " << manifest_rows.size() << " model pairs; manifest at " << g.out_dir
              << "/models.manifest\n";
    return 0;
}

int cmd_eval_pp(const std::string& model_path, const std::string& corpus_path) {
    ClassNGramModel model = load_model(model_path);
    Corpus corpus = load_corpus(corpus_path);
    PerplexityReport r = perplexity(model, corpus);
    std::printf("PP\t%.4f\ntokens\t%llu\nlogprob\t%.4f\noov\t%llu\n", r.pp,
                static_cast<unsigned long long>(r.token_count), r.total_logprob,
                static_cast<unsigned long long>(r.oov_count));
    return 0;
}

int cmd_eval_rec_or_su(const GlobalOpts& g, const std::string& manifest_path,
                       const std::string& corpus_path, const std::string& condition,
                       bool understanding) {
    EvalConfig cfg = load_config(g);
    LMRegistry reg = load_registry(manifest_path,
                                   {cfg.robust_min_utterances, cfg.robust_min_multiword});
    Corpus corpus = load_corpus(corpus_path);
    SemanticLexicon lex = default_lexicon(cfg.station_count);
    ConfusionTable table = default_confusion_table(lex);

    std::uint64_t ref_words = 0, errors = 0, su_hits = 0;
    const LMPair& fb = reg.fallback();
    for (const auto& u : corpus) {
        const LMPair& pair =
            condition == "ci" ? fb : reg.models_for(reg.resolve(u.context));
        NBestList nbest = generate_nbest(u, table, cfg.nbest_n, cfg.noise, cfg.seed);
        Hypothesis best =
            rescore(nbest, make_scorer(pair.bigram), make_scorer(pair.trigram), cfg.lambda);
        ref_words += u.tokens.size();
        errors += align_edits(best.tokens, u.tokens).total();
        su_hits += su_match(parse_frame(best.tokens, lex), u.ref_frame) ? 1 : 0;
    }
    if (understanding) {
        std::printf("SU\t%.4f\nutterances\t%zu\n",
                    static_cast<double>(su_hits) / static_cast<double>(corpus.size()),
                    corpus.size());
    } else {
        std::printf("WA\t%.4f\nref-words\t%llu\nerrors\t%llu\n",
                    (static_cast<double>(ref_words) - static_cast<double>(errors)) /
                        static_cast<double>(ref_words),
                    static_cast<unsigned long long>(ref_words),
                    static_cast<unsigned long long>(errors));
    }
    return 0;
}

int cmd_compare(const GlobalOpts& g, const std::string& grammar_path) {
    EvalConfig cfg = load_config(g);
    TemplateGrammar grammar = load_grammar_or_default(grammar_path);
    ComparisonReport report = run_compare(cfg, grammar, &std::cerr);
    fs::create_directories(g.out_dir);
    {
        std::ofstream tsv(fs::path(g.out_dir) / "report.tsv", std::ios::binary);
        tsv << report_to_tsv(report);
        std::ofstream json(fs::path(g.out_dir) / "report.json", std::ios::binary);
        json << report_to_json(report).dump(2) << '\n';
    }
    write_file_manifest(g.out_dir, {"report.tsv", "report.json"});
    std::cout << report_to_tsv(report);
    return 0;
}

int cmd_repl(const GlobalOpts& g, const std::string& manifest_path,
             const std::string& grammar_path) {
    EvalConfig cfg = load_config(g);
    SemanticLexicon lex = default_lexicon(cfg.station_count);
    LMRegistry built;
    LMRegistry* reg = nullptr;
    if (!manifest_path.empty()) {
        built = load_registry(manifest_path,
                              {cfg.robust_min_utterances, cfg.robust_min_multiword});
        reg = &built;
    } else {
        std::cerr << "training session models...\n";
        TrainedConditions tc = build_conditions(cfg, load_grammar_or_default(grammar_path),
                                                cfg.seed);
        built = std::move(tc.registry);
        reg = &built;
    }
    Timetable tt = default_timetable();

    std::cout << "hello, this is the train enquiry service.\n";
    Transcript tr = run_session(*reg, tt, lex, [&](const std::string& prompt) {
        std::cout << "S: " << prompt << "\n";
        std::cout << "   [active LM: " << to_string(reg->active()) << "]\nU: " << std::flush;
        std::string line;
        if (!std::getline(std::cin, line)) return std::optional<UserTurn>{};
        UserTurn t;
        t.text = line;
        return std::optional<UserTurn>{t};
    });
    for (const auto& t : tr.turns)
        if (t.speaker == 'S' && t.act_or_frame == "ANSWER") std::cout << "S: " << t.text << "\n";
    std::cout << "goodbye.\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"dialogue-context-specific class n-gram language model toolkit"};
    app.require_subcommand(1);

    GlobalOpts g;
    app.add_option("--config", g.config_path, "declarative JSON configuration file");
    std::uint64_t seed_opt = 0;
    auto* seed_flag = app.add_option("--seed", seed_opt, "override the configured seed");
    app.add_option("--out", g.out_dir, "output directory")->capture_default_str();

    std::string grammar_path, corpus_path, model_path, manifest_path, condition = "cd";
    std::uint32_t classes = 120;

    auto* gen = app.add_subcommand("gen-corpus", "generate the synthetic corpus");
    gen->add_option("--grammar", grammar_path, "template grammar file");

    auto* cluster = app.add_subcommand("cluster-words", "maximum-likelihood word clustering");
    cluster->add_option("--corpus", corpus_path, "corpus file (default: generate)");
    cluster->add_option("--grammar", grammar_path, "template grammar file");
    cluster->add_option("-K,--classes", classes, "number of word classes")
        ->capture_default_str();

    auto* train = app.add_subcommand("train", "train all model pairs and write a manifest");
    train->add_option("--corpus", corpus_path, "corpus file (default: generate)");
    train->add_option("--grammar", grammar_path, "template grammar file");

    auto* evalpp = app.add_subcommand("eval-pp", "perplexity of a model on a corpus");
    evalpp->add_option("--model", model_path, "model file")->required();
    evalpp->add_option("--corpus", corpus_path, "corpus file")->required();

    auto* evalrec = app.add_subcommand("eval-rec", "simulated-recognition word accuracy");
    evalrec->add_option("--manifest", manifest_path, "model manifest")->required();
    evalrec->add_option("--corpus", corpus_path, "corpus file")->required();
    evalrec->add_option("--condition", condition, "cd or ci")->capture_default_str();

    auto* evalsu = app.add_subcommand("eval-su", "sentence-understanding rate");
    evalsu->add_option("--manifest", manifest_path, "model manifest")->required();
    evalsu->add_option("--corpus", corpus_path, "corpus file")->required();
    evalsu->add_option("--condition", condition, "cd or ci")->capture_default_str();

    auto* compare = app.add_subcommand(
        "compare", "context-independent vs context-dependent PP/WA/SU comparison");
    compare->add_option("--grammar", grammar_path, "template grammar file");

    auto* repl = app.add_subcommand("repl", "interactive demo session");
    repl->add_option("--manifest", manifest_path, "model manifest (default: train in memory)");
    repl->add_option("--grammar", grammar_path, "template grammar file");

    CLI11_PARSE(app, argc, argv);
    if (seed_flag->count()) g.seed = seed_opt;

    try {
        if (gen->parsed()) return cmd_gen_corpus(g, grammar_path);
        if (cluster->parsed()) return cmd_cluster_words(g, corpus_path, grammar_path, classes);
        if (train->parsed()) return cmd_train(g, corpus_path, grammar_path);
        if (evalpp->parsed()) return cmd_eval_pp(model_path, corpus_path);
        if (evalrec->parsed())
            return cmd_eval_rec_or_su(g, manifest_path, corpus_path, condition, false);
        if (evalsu->parsed())
            return cmd_eval_rec_or_su(g, manifest_path, corpus_path, condition, true);
        if (compare->parsed()) return cmd_compare(g, grammar_path);
        if (repl->parsed()) return cmd_repl(g, manifest_path, grammar_path);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

// Command line front end: pretrain, finetune, generate, eval, probe,
// negatives, gradcheck, plus a synth helper for demo corpora.
//
// Option precedence: command-line flag > HINT_SEED (seed only) > config file
// > built-in default. Exit codes: 0 success, 2 usage/config error, 3 runtime
// abort.

#include <cctype>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "hint/augment.hpp"
#include "hint/corpus.hpp"
#include "hint/decode.hpp"
#include "hint/evalsuite.hpp"
#include "hint/model.hpp"
#include "hint/rng.hpp"
#include "hint/synthetic.hpp"
#include "hint/teacher.hpp"
#include "hint/trainer.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void require_file(const std::string& path, const std::string& what) {
    if (path.empty()) throw ConfigError(what + " path not set");
    if (!fs::exists(path)) throw ConfigError(what + " not found: " + path);
}

uint64_t fnv64_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    uint64_t h = 0xCBF29CE484222325ull;
    char buf[4096];
    while (in.read(buf, sizeof buf) || in.gcount() > 0) {
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 0x100000001B3ull;
        }
        if (!in.good()) break;
    }
    return h;
}

std::string hex64(uint64_t v) {
    char buf[19];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

// Everything a run can configure, resolved from defaults, config file, env
// and flags in that order.
struct RunConfig {
    hint::ModelConfig model;
    hint::TrainConfig train;
    hint::DecodeConfig decode;
    hint::ProbeConfig probe;
    int min_freq = 1;
    std::string corpus, heldout, vocab, checkpoint, init_checkpoint, out_dir = "out";
    std::string lexicons, oracle_file, generations, probes, metrics = "ppl,b1,b2,lr2,sr1,d4";
    std::string aspect = "temporal";
};

void apply_json(RunConfig& rc, const json& j) {
    auto get = [&](const char* key, auto& slot) {
        if (j.contains(key)) slot = j.at(key).get<std::decay_t<decltype(slot)>>();
    };
    get("d_model", rc.model.d_model);
    get("n_layers_enc", rc.model.n_layers_enc);
    get("n_layers_dec", rc.model.n_layers_dec);
    get("n_heads", rc.model.n_heads);
    get("d_ff", rc.model.d_ff);
    get("vocab_size", rc.model.vocab_size);
    get("max_len", rc.model.max_len);
    get("learning_rate", rc.train.learning_rate);
    get("adam_beta1", rc.train.adam_beta1);
    get("adam_beta2", rc.train.adam_beta2);
    get("adam_eps", rc.train.adam_eps);
    get("batch_size", rc.train.batch_size);
    get("max_steps", rc.train.max_steps);
    get("seed", rc.train.seed);
    get("negatives_per_human", rc.train.negatives_per_human);
    get("k_target", rc.train.k_target);
    get("log_every", rc.train.log_every);
    get("delta", rc.train.objective.delta);
    get("lambda1", rc.train.objective.lambda1);
    get("lambda2", rc.train.objective.lambda2);
    get("lm_counts_special", rc.train.objective.lm_counts_special);
    get("top_p", rc.decode.top_p);
    get("temperature", rc.decode.temperature);
    get("max_new_tokens", rc.decode.max_new_tokens);
    get("max_sentences", rc.decode.max_sentences);
    get("relatedness_threshold", rc.probe.relatedness_threshold);
    get("min_freq", rc.min_freq);
    get("corpus", rc.corpus);
    get("heldout", rc.heldout);
    get("vocab", rc.vocab);
    get("checkpoint", rc.checkpoint);
    get("init_checkpoint", rc.init_checkpoint);
    get("out_dir", rc.out_dir);
    get("lexicons", rc.lexicons);
    get("oracle_file", rc.oracle_file);
    get("generations", rc.generations);
    get("probes", rc.probes);
    get("metrics", rc.metrics);
    get("aspect", rc.aspect);
    if (j.contains("mode")) rc.train.mode = hint::train_mode_from_name(j.at("mode").get<std::string>());
}

json config_snapshot(const RunConfig& rc) {
    json j;
    j["d_model"] = rc.model.d_model;
    j["n_layers_enc"] = rc.model.n_layers_enc;
    j["n_layers_dec"] = rc.model.n_layers_dec;
    j["n_heads"] = rc.model.n_heads;
    j["d_ff"] = rc.model.d_ff;
    j["vocab_size"] = rc.model.vocab_size;
    j["max_len"] = rc.model.max_len;
    j["learning_rate"] = rc.train.learning_rate;
    j["adam_beta1"] = rc.train.adam_beta1;
    j["adam_beta2"] = rc.train.adam_beta2;
    j["adam_eps"] = rc.train.adam_eps;
    j["batch_size"] = rc.train.batch_size;
    j["max_steps"] = rc.train.max_steps;
    j["seed"] = rc.train.seed;
    j["negatives_per_human"] = rc.train.negatives_per_human;
    j["mode"] = hint::train_mode_name(rc.train.mode);
    j["k_target"] = rc.train.k_target;
    j["log_every"] = rc.train.log_every;
    j["delta"] = rc.train.objective.delta;
    j["lambda1"] = rc.train.objective.lambda1;
    j["lambda2"] = rc.train.objective.lambda2;
    j["lm_counts_special"] = rc.train.objective.lm_counts_special;
    j["top_p"] = rc.decode.top_p;
    j["temperature"] = rc.decode.temperature;
    j["max_new_tokens"] = rc.decode.max_new_tokens;
    j["max_sentences"] = rc.decode.max_sentences;
    j["relatedness_threshold"] = rc.probe.relatedness_threshold;
    j["min_freq"] = rc.min_freq;
    j["corpus"] = rc.corpus;
    j["vocab"] = rc.vocab;
    j["out_dir"] = rc.out_dir;
    return j;
}

void write_manifest(const std::string& path, const std::string& command, const RunConfig& rc,
                    const std::vector<std::string>& artifacts) {
    json j;
    j["command"] = command;
    j["seed"] = rc.train.seed;
    j["config"] = config_snapshot(rc);
    json hashes = json::object();
    for (const std::string& a : artifacts)
        if (fs::exists(a)) hashes[a] = hex64(fnv64_file(a));
    j["artifacts"] = hashes;
    std::ofstream out(path);
    out << j.dump(2) << "\n";
}

struct CommonFlags {
    std::optional<std::string> config_path;
    std::optional<uint64_t> seed;
};

void add_common(CLI::App* cmd, CommonFlags& cf) {
    cmd->add_option("--config", cf.config_path, "JSON config file (flags override its keys)");
    cmd->add_option("--seed", cf.seed, "global seed (precedence: flag > HINT_SEED > config file)");
}

RunConfig resolve(const CommonFlags& cf) {
    RunConfig rc;
    if (cf.config_path) {
        require_file(*cf.config_path, "config file");
        std::ifstream in(*cf.config_path);
        json j;
        try {
            in >> j;
        } catch (const std::exception& e) {
            throw ConfigError(std::string("bad config JSON: ") + e.what());
        }
        if (j.contains("config") && j["config"].is_object()) j = j["config"];  // accept manifests
        apply_json(rc, j);
    }
    if (const char* env = std::getenv("HINT_SEED")) {
        try {
            rc.train.seed = std::stoull(env);
        } catch (...) {
            throw ConfigError("HINT_SEED is not an integer");
        }
    }
    if (cf.seed) rc.train.seed = *cf.seed;
    return rc;
}

hint::Vocab load_or_build_vocab(RunConfig& rc, const std::vector<hint::Document>& docs) {
    if (!rc.vocab.empty() && fs::exists(rc.vocab)) return hint::load_vocab(rc.vocab);
    hint::Vocab v = hint::build_vocab(docs, rc.min_freq);
    if (rc.vocab.empty()) rc.vocab = (fs::path(rc.out_dir) / "vocab.txt").string();
    const fs::path parent = fs::path(rc.vocab).parent_path();
    if (!parent.empty()) fs::create_directories(parent);
    hint::save_vocab(v, rc.vocab);
    return v;
}

std::unique_ptr<hint::SimilarityOracle> make_oracle(const RunConfig& rc, const hint::Vocab& vocab) {
    if (!rc.oracle_file.empty()) {
        require_file(rc.oracle_file, "oracle file");
        return std::make_unique<hint::ExternalFileOracle>(rc.oracle_file, vocab);
    }
    return std::make_unique<hint::HashedOracle>(hint::derive_seed(rc.train.seed, "oracle"));
}

hint::Lexicons make_lexicons(const RunConfig& rc, const hint::Vocab& vocab) {
    if (!rc.lexicons.empty()) {
        if (!fs::exists(rc.lexicons)) throw ConfigError("lexicon dir not found: " + rc.lexicons);
        return hint::load_lexicons(rc.lexicons, vocab);
    }
    return hint::default_lexicons(vocab);
}

// ---------------------------------------------------------------------------

int run_synth(RunConfig& rc, int docs, const std::string& out, const std::string& heldout,
              int heldout_docs) {
    auto corpus = hint::make_synthetic_corpus(docs + heldout_docs, rc.train.seed);
    std::vector<hint::Document> train(corpus.begin(), corpus.begin() + docs);
    hint::save_corpus_jsonl(train, out);
    std::vector<std::string> artifacts = {out};
    if (!heldout.empty() && heldout_docs > 0) {
        std::vector<hint::Document> held(corpus.begin() + docs, corpus.end());
        hint::save_corpus_jsonl(held, heldout);
        artifacts.push_back(heldout);
    }
    write_manifest(out + ".manifest.json", "synth", rc, artifacts);
    std::cout << "wrote " << docs << " documents to " << out << "\n";
    return 0;
}

int run_training(RunConfig& rc, bool finetune_cmd, bool with_aux, bool no_sen, bool no_dis) {
    require_file(rc.corpus, "corpus");
    if (no_sen) rc.train.objective.lambda2 = 0.0;
    if (no_dis) rc.train.objective.lambda1 = 0.0;
    rc.train.mode = finetune_cmd
                        ? (with_aux ? hint::TrainMode::finetune_aux : hint::TrainMode::finetune)
                        : hint::TrainMode::pretrain;
    fs::create_directories(rc.out_dir);

    auto docs = hint::load_corpus_jsonl(rc.corpus);
    hint::Vocab vocab = load_or_build_vocab(rc, docs);
    rc.model.vocab_size = vocab.size();

    std::unique_ptr<hint::Model> model;
    std::unique_ptr<hint::Trainer> trainer;
    if (!rc.init_checkpoint.empty()) {
        require_file(rc.init_checkpoint + ".json", "init checkpoint manifest");
        require_file(rc.init_checkpoint + ".bin", "init checkpoint blob");
        const hint::ModelConfig mc = hint::checkpoint_model_config(rc.init_checkpoint);
        rc.model = mc;
        model = std::make_unique<hint::Model>(mc);
        trainer = std::make_unique<hint::Trainer>(*model, rc.train);
        trainer->restore(rc.init_checkpoint);
    } else {
        model = std::make_unique<hint::Model>(rc.model);
        model->init_params(rc.train.seed);
        trainer = std::make_unique<hint::Trainer>(*model, rc.train);
    }

    auto oracle = make_oracle(rc, vocab);
    hint::TrainData data = hint::frame_documents(docs, vocab, rc.train.k_target, rc.model.max_len);

    const std::string loss_path = (fs::path(rc.out_dir) / "loss.jsonl").string();
    std::ofstream loss_log(loss_path);
    trainer->train(data, *oracle, rc.train.max_steps, &loss_log);
    loss_log.close();

    const std::string ckpt = (fs::path(rc.out_dir) / "checkpoint").string();
    trainer->save(ckpt);
    write_manifest((fs::path(rc.out_dir) / "manifest.json").string(),
                   finetune_cmd ? "finetune" : "pretrain", rc,
                   {ckpt + ".bin", ckpt + ".json", loss_path, rc.vocab});
    std::cout << "trained " << rc.train.max_steps << " steps; checkpoint at " << ckpt << "\n";
    return 0;
}

int run_generate(RunConfig& rc, const std::string& input_path, const std::string& out_path) {
    require_file(rc.checkpoint + ".json", "checkpoint manifest");
    require_file(rc.checkpoint + ".bin", "checkpoint blob");
    require_file(rc.vocab, "vocab");
    require_file(input_path, "input file");
    hint::Vocab vocab = hint::load_vocab(rc.vocab);
    hint::Model model(hint::checkpoint_model_config(rc.checkpoint));
    hint::Trainer loader(model, rc.train);
    loader.restore(rc.checkpoint);

    std::ofstream out(out_path);
    if (!out.is_open()) throw ConfigError("cannot write output: " + out_path);

    std::ifstream in(input_path);
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        json j = json::parse(line);
        const std::string id = j.value("id", "line" + std::to_string(lineno));
        const std::string input_text = j.value("input", "");
        std::vector<int> input_tokens;
        for (const std::string& t : hint::tokenize(input_text))
            input_tokens.push_back(vocab.encode(t));
        if (static_cast<int>(input_tokens.size()) > model.config().max_len)
            input_tokens.resize(static_cast<size_t>(model.config().max_len));
        hint::Rng rng(hint::hash_combine(hint::derive_seed(rc.train.seed, "generate"),
                                         hint::hash_bytes(id)));
        std::vector<int> raw = hint::generate(input_tokens, model, rc.decode, rng);
        json rec;
        rec["id"] = id;
        rec["raw_tokens"] = raw;
        rec["text"] = hint::decode_tokens(hint::strip_special(raw), vocab);
        out << rec.dump() << "\n";
    }
    out.close();
    write_manifest(out_path + ".manifest.json", "generate", rc, {out_path});
    return 0;
}

struct GenRecord {
    std::string id;
    std::vector<int> raw_tokens;
};

std::vector<GenRecord> load_generations(const std::string& path) {
    require_file(path, "generations file");
    std::vector<GenRecord> out;
    std::ifstream in(path);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        json j = json::parse(line);
        GenRecord r;
        r.id = j.value("id", "");
        for (const auto& t : j.at("raw_tokens")) r.raw_tokens.push_back(t.get<int>());
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<std::vector<int>> sentences_of_raw(const std::vector<int>& raw) {
    std::vector<std::vector<int>> sents;
    std::vector<int> cur;
    for (int id : raw) {
        if (id == hint::SEN || id == hint::EOS) {
            if (!cur.empty()) sents.push_back(cur);
            cur.clear();
        } else if (id != hint::DIS && id != hint::BOS && id != hint::PAD) {
            cur.push_back(id);
        }
    }
    if (!cur.empty()) sents.push_back(cur);
    return sents;
}

int run_eval(RunConfig& rc, const std::string& out_path) {
    std::vector<std::string> metric_list;
    {
        std::stringstream ss(rc.metrics);
        std::string item;
        while (std::getline(ss, item, ',')) metric_list.push_back(item);
    }
    for (const std::string& mname : metric_list) {
        bool known = mname == "ppl" || mname == "b1" || mname == "b2" || mname == "d4";
        if (!known && mname.size() > 2 && (mname.rfind("lr", 0) == 0 || mname.rfind("sr", 0) == 0)) {
            known = true;
            for (size_t i = 2; i < mname.size(); ++i)
                known = known && std::isdigit(static_cast<unsigned char>(mname[i]));
        }
        if (!known) throw ConfigError("unknown metric name: " + mname);
    }

    require_file(rc.vocab, "vocab");
    hint::Vocab vocab = hint::load_vocab(rc.vocab);

    json report = json::object();

    std::vector<hint::Document> corpus_docs;
    if (!rc.corpus.empty()) {
        require_file(rc.corpus, "corpus");
        corpus_docs = hint::load_corpus_jsonl(rc.corpus);
    }

    std::vector<GenRecord> gens;
    std::vector<std::vector<std::string>> gen_texts;
    if (!rc.generations.empty()) {
        gens = load_generations(rc.generations);
        for (const auto& g : gens) {
            std::vector<std::string> toks;
            for (int id : hint::strip_special(g.raw_tokens)) toks.push_back(vocab.decode(id));
            gen_texts.push_back(std::move(toks));
        }
    }

    std::unique_ptr<hint::Model> model;
    std::unique_ptr<hint::Trainer> loader;
    for (const std::string& mname : metric_list) {
        if (mname == "ppl") {
            require_file(rc.checkpoint + ".json", "checkpoint manifest");
            if (corpus_docs.empty()) throw ConfigError("ppl needs --corpus");
            if (!model) {
                model = std::make_unique<hint::Model>(hint::checkpoint_model_config(rc.checkpoint));
                loader = std::make_unique<hint::Trainer>(*model, rc.train);
                loader->restore(rc.checkpoint);
            }
            std::vector<hint::AugmentedSequence> seqs;
            std::vector<std::vector<int>> inputs;
            for (const auto& d : corpus_docs) {
                hint::SegmentedDocument seg = hint::encode_document(d, vocab);
                seg = hint::truncate_to_fit(seg, model->config().max_len);
                if (static_cast<int>(seg.input_tokens.size()) > model->config().max_len)
                    seg.input_tokens.resize(static_cast<size_t>(model->config().max_len));
                seqs.push_back(hint::insert_special_tokens(seg));
                inputs.push_back(seg.input_tokens);
            }
            report["ppl"] = hint::perplexity(*model, seqs, inputs);
            report["ppl_texts"] = seqs.size();
        } else if (mname == "b1" || mname == "b2") {
            if (gens.empty()) throw ConfigError(mname + " needs --generations");
            if (corpus_docs.empty()) throw ConfigError(mname + " needs --corpus references");
            std::map<std::string, const hint::Document*> by_id;
            for (const auto& d : corpus_docs) by_id[d.id] = &d;
            std::vector<std::vector<std::string>> cands, refs;
            for (size_t i = 0; i < gens.size(); ++i) {
                auto it = by_id.find(gens[i].id);
                if (it == by_id.end()) continue;
                cands.push_back(gen_texts[i]);
                refs.push_back(hint::tokenize(it->second->target_text));
            }
            if (cands.empty()) throw ConfigError("no generation ids match the corpus");
            report[mname] = hint::bleu_n(cands, refs, mname == "b1" ? 1 : 2);
            report["bleu_texts"] = cands.size();
        } else if (mname.rfind("lr", 0) == 0) {
            if (gens.empty()) throw ConfigError(mname + " needs --generations");
            const int n = std::stoi(mname.substr(2));
            report[mname] = hint::lexical_repetition(gen_texts, n);
        } else if (mname.rfind("sr", 0) == 0) {
            if (gens.empty()) throw ConfigError(mname + " needs --generations");
            const int n = std::stoi(mname.substr(2));
            auto oracle = make_oracle(rc, vocab);
            std::vector<std::vector<std::vector<int>>> texts;
            for (const auto& g : gens) texts.push_back(sentences_of_raw(g.raw_tokens));
            auto r = hint::semantic_repetition(texts, n, *oracle);
            report[mname] = r.value;
            report["sr_counted"] = r.counted;
            report["sr_skipped"] = r.skipped;
        } else if (mname == "d4") {
            if (gens.empty()) throw ConfigError("d4 needs --generations");
            report["d4"] = hint::distinct4(gen_texts);
            report["d4_text_averaged"] = hint::distinct4_text_averaged(gen_texts);
        }
    }
    if (!gen_texts.empty()) report["texts"] = gen_texts.size();

    std::ofstream out(out_path);
    if (!out.is_open()) throw ConfigError("cannot write report: " + out_path);
    out << report.dump(2) << "\n";
    out.close();
    write_manifest(out_path + ".manifest.json", "eval", rc, {out_path});
    std::cout << report.dump(2) << "\n";
    return 0;
}

int run_probe_build(RunConfig& rc, const std::string& out_path) {
    require_file(rc.corpus, "corpus");
    require_file(rc.vocab, "vocab");
    hint::Vocab vocab = hint::load_vocab(rc.vocab);
    auto aspect = hint::aspect_from_name(rc.aspect);
    if (!aspect) throw ConfigError("unknown aspect: " + rc.aspect);
    auto docs = hint::load_corpus_jsonl(rc.corpus);
    std::vector<hint::SegmentedDocument> segs;
    std::vector<std::string> ids;
    for (const auto& d : docs) {
        segs.push_back(hint::encode_document(d, vocab));
        ids.push_back(d.id);
    }
    auto oracle = make_oracle(rc, vocab);
    hint::Lexicons lex = make_lexicons(rc, vocab);
    hint::Rng rng(hint::derive_seed(rc.train.seed, "probe-build"));
    auto res = hint::build_probe_set(segs, ids, *aspect, *oracle, lex, vocab, rc.probe, rng);
    if (res.empty_warning)
        std::cerr << "warning: aspect " << rc.aspect << " matched no corpus text\n";
    hint::save_probes_jsonl(res.probes, vocab, out_path);
    write_manifest(out_path + ".manifest.json", "probe build", rc, {out_path});
    std::cout << "wrote " << res.probes.size() << " probes to " << out_path << "\n";
    return 0;
}

int run_probe_score(RunConfig& rc, const std::string& out_path) {
    require_file(rc.checkpoint + ".json", "checkpoint manifest");
    require_file(rc.vocab, "vocab");
    require_file(rc.probes, "probe file");
    hint::Vocab vocab = hint::load_vocab(rc.vocab);
    hint::Model model(hint::checkpoint_model_config(rc.checkpoint));
    hint::Trainer loader(model, rc.train);
    loader.restore(rc.checkpoint);
    auto probes = hint::load_probes_jsonl(rc.probes, vocab);
    auto table = hint::aspect_ppl(model, probes);
    json j = json::object();
    for (const auto& [aspect, pols] : table.ppl) {
        for (const auto& [pol, ppl] : pols) {
            j[aspect][pol]["ppl"] = ppl;
            j[aspect][pol]["count"] = table.counts.at(aspect).at(pol);
        }
    }
    std::ofstream out(out_path);
    if (!out.is_open()) throw ConfigError("cannot write table: " + out_path);
    out << j.dump(2) << "\n";
    out.close();
    write_manifest(out_path + ".manifest.json", "probe score", rc, {out_path});
    std::cout << j.dump(2) << "\n";
    return 0;
}

int run_negatives(RunConfig& rc, const std::string& out_path) {
    require_file(rc.corpus, "corpus");
    require_file(rc.vocab, "vocab");
    hint::Vocab vocab = hint::load_vocab(rc.vocab);
    auto docs = hint::load_corpus_jsonl(rc.corpus);
    std::vector<hint::SegmentedDocument> segs;
    std::vector<std::string> ids;
    for (const auto& d : docs) {
        segs.push_back(hint::encode_document(d, vocab));
        ids.push_back(d.id);
    }
    std::ofstream out(out_path);
    if (!out.is_open()) throw ConfigError("cannot write negatives: " + out_path);
    const uint64_t base = hint::derive_seed(rc.train.seed, "negatives");
    for (size_t i = 0; i < segs.size(); ++i) {
        hint::Rng rng(hint::hash_combine(base, hint::hash_bytes(ids[i])));
        hint::TrainingSample s = hint::sample_negative(segs[i], ids[i], segs, ids, rng);
        json j;
        j["id"] = ids[i] + "#neg";
        j["source_id"] = ids[i];
        j["kind"] = hint::sample_kind_name(s.kind);
        j["original_order"] = s.original_order;
        json sents = json::array();
        for (const auto& sent : s.sentences) sents.push_back(hint::decode_tokens(sent, vocab));
        j["sentences"] = sents;
        out << j.dump() << "\n";
    }
    out.close();
    write_manifest(out_path + ".manifest.json", "negatives", rc, {out_path});
    std::cout << "wrote " << segs.size() << " negatives to " << out_path << "\n";
    return 0;
}

int run_gradcheck(RunConfig& rc, int coords) {
    // small deterministic fixture; --corpus overrides the built-in one
    std::vector<hint::Document> docs;
    if (!rc.corpus.empty()) {
        require_file(rc.corpus, "corpus");
        docs = hint::load_corpus_jsonl(rc.corpus);
        if (docs.size() > 6) docs.resize(6);
    } else {
        docs = hint::make_synthetic_corpus(6, rc.train.seed);
    }
    hint::Vocab vocab = hint::build_vocab(docs, 1);
    hint::ModelConfig mc;
    mc.d_model = 16;
    mc.n_layers_enc = 1;
    mc.n_layers_dec = 1;
    mc.n_heads = 4;
    mc.d_ff = 24;
    mc.vocab_size = vocab.size();
    mc.max_len = 64;
    hint::Model model(mc);
    model.init_params(rc.train.seed);

    hint::TrainData data = hint::frame_documents(docs, vocab, rc.train.k_target, mc.max_len);
    std::vector<hint::TrainingSample> batch;
    batch.push_back(hint::make_human(data.segs[0], data.ids[0]));
    hint::Rng rng(hint::derive_seed(rc.train.seed, "gradcheck-batch"));
    batch.push_back(hint::make_shuffled(data.segs[1], data.ids[1], rng));
    batch.push_back(hint::make_repeated(data.segs[2], data.ids[2], rng));

    hint::HashedOracle oracle(hint::derive_seed(rc.train.seed, "oracle"));
    auto report =
        hint::gradient_check(model, batch, oracle, rc.train.objective, coords, rc.train.seed);
    for (const auto& pl : report.per_loss) {
        std::cout << pl.loss << ": " << pl.coords << " coords, max rel err " << pl.max_rel_err
                  << (pl.failures.empty() ? "" : " FAIL") << "\n";
        for (const auto& f : pl.failures)
            std::cout << "  " << f.tensor << "[" << f.row << "," << f.col << "] analytic "
                      << f.analytic << " fd " << f.fd << " rel " << f.rel_err << "\n";
    }
    if (!report.pass) {
        std::cerr << "gradient check failed\n";
        return 3;
    }
    std::cout << "gradient check passed (max rel err " << report.max_rel_err << ")\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"coherence-aware long-text generation trainer"};
    app.require_subcommand(1);

    CommonFlags cf;
    RunConfig flag_rc;

    auto* synth = app.add_subcommand("synth", "generate the synthetic story corpus");
    add_common(synth, cf);
    int synth_docs = 2000, heldout_docs = 0;
    std::string synth_out = "corpus.jsonl", synth_heldout;
    synth->add_option("--docs", synth_docs, "number of documents");
    synth->add_option("--out", synth_out, "output JSONL path");
    synth->add_option("--heldout", synth_heldout, "held-out JSONL path");
    synth->add_option("--heldout-docs", heldout_docs, "held-out document count");

    // sentinel defaults (-1 / empty) mean "not set on the command line"
    flag_rc.train.max_steps = -1;
    flag_rc.train.batch_size = -1;
    flag_rc.train.learning_rate = -1.0;
    flag_rc.train.objective.lambda1 = -1.0;
    flag_rc.train.objective.lambda2 = -1.0;
    flag_rc.train.objective.delta = -1.0;
    flag_rc.model.d_model = -1;
    flag_rc.model.n_heads = -1;
    flag_rc.model.d_ff = -1;
    flag_rc.model.n_layers_enc = -1;
    flag_rc.model.n_layers_dec = -1;
    flag_rc.model.max_len = -1;
    flag_rc.train.k_target = -1;
    flag_rc.train.negatives_per_human = -1;
    flag_rc.min_freq = -1;
    flag_rc.train.log_every = -1;
    flag_rc.decode.top_p = -1.0;
    flag_rc.decode.temperature = -1.0;
    flag_rc.decode.max_new_tokens = -1;
    flag_rc.decode.max_sentences = -1;
    flag_rc.probe.relatedness_threshold = -1.0;
    flag_rc.metrics.clear();
    flag_rc.aspect.clear();
    flag_rc.out_dir.clear();

    auto add_train_flags = [&](CLI::App* cmd) {
        add_common(cmd, cf);
        cmd->add_option("--corpus", flag_rc.corpus, "training corpus JSONL");
        cmd->add_option("--vocab", flag_rc.vocab, "vocab file (built and saved when absent)");
        cmd->add_option("--out-dir", flag_rc.out_dir, "output directory");
        cmd->add_option("--init-checkpoint", flag_rc.init_checkpoint, "warm-start checkpoint prefix");
        cmd->add_option("--steps", flag_rc.train.max_steps, "training steps");
        cmd->add_option("--batch-size", flag_rc.train.batch_size);
        cmd->add_option("--learning-rate", flag_rc.train.learning_rate);
        cmd->add_option("--lambda1", flag_rc.train.objective.lambda1);
        cmd->add_option("--lambda2", flag_rc.train.objective.lambda2);
        cmd->add_option("--delta", flag_rc.train.objective.delta);
        cmd->add_option("--d-model", flag_rc.model.d_model);
        cmd->add_option("--n-heads", flag_rc.model.n_heads);
        cmd->add_option("--d-ff", flag_rc.model.d_ff);
        cmd->add_option("--n-layers-enc", flag_rc.model.n_layers_enc);
        cmd->add_option("--n-layers-dec", flag_rc.model.n_layers_dec);
        cmd->add_option("--max-len", flag_rc.model.max_len);
        cmd->add_option("--k-target", flag_rc.train.k_target);
        cmd->add_option("--negatives-per-human", flag_rc.train.negatives_per_human);
        cmd->add_option("--min-freq", flag_rc.min_freq);
        cmd->add_option("--log-every", flag_rc.train.log_every);
    };

    auto* pretrain = app.add_subcommand("pretrain", "pretrain with the combined objectives");
    add_train_flags(pretrain);
    bool no_sen = false, no_dis = false;
    pretrain->add_flag("--no-sen", no_sen, "disable the similarity objective (lambda2 = 0)");
    pretrain->add_flag("--no-dis", no_dis, "disable the order objective (lambda1 = 0)");

    auto* finetune = app.add_subcommand("finetune", "fine-tune with the LM objective");
    add_train_flags(finetune);
    bool with_aux = false;
    finetune->add_flag("--with-aux", with_aux, "keep the auxiliary objectives during fine-tuning");
    finetune->add_flag("--no-sen", no_sen, "with --with-aux: lambda2 = 0");
    finetune->add_flag("--no-dis", no_dis, "with --with-aux: lambda1 = 0");

    auto* generate = app.add_subcommand("generate", "sample continuations for a prompt file");
    add_common(generate, cf);
    std::string gen_input, gen_out = "generations.jsonl";
    generate->add_option("--checkpoint", flag_rc.checkpoint, "checkpoint prefix");
    generate->add_option("--vocab", flag_rc.vocab, "vocab file");
    generate->add_option("--input", gen_input, "JSONL prompts with id/input fields")->required();
    generate->add_option("--out", gen_out, "output JSONL");
    generate->add_option("--top-p", flag_rc.decode.top_p);
    generate->add_option("--temperature", flag_rc.decode.temperature);
    generate->add_option("--max-new-tokens", flag_rc.decode.max_new_tokens);
    generate->add_option("--max-sentences", flag_rc.decode.max_sentences);

    auto* evalc = app.add_subcommand("eval", "compute automatic metrics");
    add_common(evalc, cf);
    std::string eval_out = "report.json";
    evalc->add_option("--checkpoint", flag_rc.checkpoint, "checkpoint prefix (for ppl)");
    evalc->add_option("--vocab", flag_rc.vocab, "vocab file");
    evalc->add_option("--corpus", flag_rc.corpus, "reference corpus JSONL");
    evalc->add_option("--generations", flag_rc.generations, "generated JSONL (from generate)");
    evalc->add_option("--metrics", flag_rc.metrics, "comma list: ppl,b1,b2,lr<n>,sr<n>,d4");
    evalc->add_option("--out", eval_out, "report path");

    auto* probe = app.add_subcommand("probe", "build or score coherence probe sets");
    probe->require_subcommand(1);
    auto* pbuild = probe->add_subcommand("build", "construct probes for one aspect");
    add_common(pbuild, cf);
    std::string probe_out = "probes.jsonl";
    pbuild->add_option("--corpus", flag_rc.corpus, "source corpus JSONL");
    pbuild->add_option("--vocab", flag_rc.vocab, "vocab file");
    pbuild->add_option("--aspect", flag_rc.aspect,
                       "repetition|relatedness|negation|causal|temporal");
    pbuild->add_option("--lexicons", flag_rc.lexicons, "lexicon directory");
    pbuild->add_option("--relatedness-threshold", flag_rc.probe.relatedness_threshold);
    pbuild->add_option("--out", probe_out, "probe JSONL path");
    auto* pscore = probe->add_subcommand("score", "per-aspect perplexity table");
    add_common(pscore, cf);
    std::string score_out = "probe_scores.json";
    pscore->add_option("--checkpoint", flag_rc.checkpoint, "checkpoint prefix");
    pscore->add_option("--vocab", flag_rc.vocab, "vocab file");
    pscore->add_option("--probes", flag_rc.probes, "probe JSONL (from probe build)");
    pscore->add_option("--out", score_out, "score table path");

    auto* negatives = app.add_subcommand("negatives", "emit one negative sample per document");
    add_common(negatives, cf);
    std::string neg_out = "negatives.jsonl";
    negatives->add_option("--corpus", flag_rc.corpus, "corpus JSONL");
    negatives->add_option("--vocab", flag_rc.vocab, "vocab file");
    negatives->add_option("--out", neg_out, "output JSONL");

    auto* gradcheck = app.add_subcommand("gradcheck", "finite-difference gradient verification");
    add_common(gradcheck, cf);
    int gc_coords = 200;
    gradcheck->add_option("--coords", gc_coords, "minimum sampled coordinates per loss");
    gradcheck->add_option("--corpus", flag_rc.corpus, "optional corpus for the check batch");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        RunConfig rc = resolve(cf);
        auto merge_str = [](std::string& dst, const std::string& src) {
            if (!src.empty()) dst = src;
        };
        merge_str(rc.corpus, flag_rc.corpus);
        merge_str(rc.vocab, flag_rc.vocab);
        merge_str(rc.out_dir, flag_rc.out_dir);
        merge_str(rc.init_checkpoint, flag_rc.init_checkpoint);
        merge_str(rc.checkpoint, flag_rc.checkpoint);
        merge_str(rc.generations, flag_rc.generations);
        merge_str(rc.probes, flag_rc.probes);
        merge_str(rc.lexicons, flag_rc.lexicons);
        merge_str(rc.metrics, flag_rc.metrics);
        merge_str(rc.aspect, flag_rc.aspect);
        auto merge_pos = [](auto& dst, auto src) {
            if (src >= 0) dst = src;
        };
        merge_pos(rc.train.max_steps, flag_rc.train.max_steps);
        merge_pos(rc.train.batch_size, flag_rc.train.batch_size);
        merge_pos(rc.train.learning_rate, flag_rc.train.learning_rate);
        merge_pos(rc.train.objective.lambda1, flag_rc.train.objective.lambda1);
        merge_pos(rc.train.objective.lambda2, flag_rc.train.objective.lambda2);
        merge_pos(rc.train.objective.delta, flag_rc.train.objective.delta);
        merge_pos(rc.model.d_model, flag_rc.model.d_model);
        merge_pos(rc.model.n_heads, flag_rc.model.n_heads);
        merge_pos(rc.model.d_ff, flag_rc.model.d_ff);
        merge_pos(rc.model.n_layers_enc, flag_rc.model.n_layers_enc);
        merge_pos(rc.model.n_layers_dec, flag_rc.model.n_layers_dec);
        merge_pos(rc.model.max_len, flag_rc.model.max_len);
        merge_pos(rc.train.k_target, flag_rc.train.k_target);
        merge_pos(rc.train.negatives_per_human, flag_rc.train.negatives_per_human);
        merge_pos(rc.min_freq, flag_rc.min_freq);
        merge_pos(rc.train.log_every, flag_rc.train.log_every);
        merge_pos(rc.decode.top_p, flag_rc.decode.top_p);
        merge_pos(rc.decode.temperature, flag_rc.decode.temperature);
        merge_pos(rc.decode.max_new_tokens, flag_rc.decode.max_new_tokens);
        merge_pos(rc.decode.max_sentences, flag_rc.decode.max_sentences);
        merge_pos(rc.probe.relatedness_threshold, flag_rc.probe.relatedness_threshold);

        if (synth->parsed()) return run_synth(rc, synth_docs, synth_out, synth_heldout, heldout_docs);
        if (pretrain->parsed()) return run_training(rc, false, false, no_sen, no_dis);
        if (finetune->parsed()) return run_training(rc, true, with_aux, no_sen, no_dis);
        if (generate->parsed()) return run_generate(rc, gen_input, gen_out);
        if (evalc->parsed()) return run_eval(rc, eval_out);
        if (probe->parsed()) {
            if (pbuild->parsed()) return run_probe_build(rc, probe_out);
            return run_probe_score(rc, score_out);
        }
        if (negatives->parsed()) return run_negatives(rc, neg_out);
        if (gradcheck->parsed()) return run_gradcheck(rc, gc_coords);
        return 2;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}

#include "hint/augment.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace hint {

const char* sample_kind_name(SampleKind k) {
    switch (k) {
        case SampleKind::human: return "human";
        case SampleKind::shuffled: return "shuffled";
        case SampleKind::repeated: return "repeated";
        case SampleKind::substituted: return "substituted";
    }
    return "?";
}

SampleKind sample_kind_from_name(const std::string& s) {
    if (s == "human") return SampleKind::human;
    if (s == "shuffled") return SampleKind::shuffled;
    if (s == "repeated") return SampleKind::repeated;
    if (s == "substituted") return SampleKind::substituted;
    throw std::runtime_error("unknown sample kind: " + s);
}

namespace {

std::vector<int> identity_order(int k) {
    std::vector<int> o(static_cast<size_t>(k));
    for (int i = 0; i < k; ++i) o[i] = i;
    return o;
}

TrainingSample finish_sample(std::vector<std::vector<int>> sentences, std::vector<int> input_tokens,
                             SampleKind kind, const std::string& source_id, std::vector<int> order) {
    TrainingSample s;
    SegmentedDocument seg;
    seg.input_tokens = input_tokens;
    seg.sentences = sentences;
    s.seq = insert_special_tokens(seg);
    s.sentences = std::move(sentences);
    s.input_tokens = std::move(input_tokens);
    s.kind = kind;
    s.source_id = source_id;
    s.original_order = std::move(order);
    return s;
}

}  // namespace

TrainingSample make_human(const SegmentedDocument& seg, const std::string& source_id) {
    return finish_sample(seg.sentences, seg.input_tokens, SampleKind::human, source_id,
                         identity_order(static_cast<int>(seg.sentences.size())));
}

TrainingSample make_shuffled(const SegmentedDocument& seg, const std::string& source_id, Rng& rng) {
    const int k = static_cast<int>(seg.sentences.size());
    if (k < 2) throw std::runtime_error("unshufflable");
    std::vector<int> perm;
    do {
        perm = identity_order(k);
        for (int i = k - 1; i > 0; --i) {
            const int j = static_cast<int>(rng.below(static_cast<uint32_t>(i + 1)));
            std::swap(perm[i], perm[j]);
        }
    } while (perm == identity_order(k));
    std::vector<std::vector<int>> sents(static_cast<size_t>(k));
    for (int i = 0; i < k; ++i) sents[i] = seg.sentences[perm[i]];
    return finish_sample(std::move(sents), seg.input_tokens, SampleKind::shuffled, source_id,
                         std::move(perm));
}

TrainingSample make_repeated(const SegmentedDocument& seg, const std::string& source_id, Rng& rng) {
    const int k = static_cast<int>(seg.sentences.size());
    if (k < 1) throw std::runtime_error("empty document");
    const int i = static_cast<int>(rng.below(static_cast<uint32_t>(k)));
    std::vector<std::vector<int>> sents = seg.sentences;
    sents.insert(sents.begin() + i + 1, sents[i]);
    return finish_sample(std::move(sents), seg.input_tokens, SampleKind::repeated, source_id,
                         identity_order(k + 1));
}

TrainingSample make_substituted(const SegmentedDocument& seg, const std::string& source_id,
                                const std::vector<SegmentedDocument>& corpus,
                                const std::vector<std::string>& corpus_ids, Rng& rng) {
    assert(corpus.size() == corpus_ids.size());
    std::vector<int> donors;
    for (size_t d = 0; d < corpus.size(); ++d)
        if (corpus_ids[d] != source_id) donors.push_back(static_cast<int>(d));
    if (donors.empty()) throw std::runtime_error("corpus too small");
    const int k = static_cast<int>(seg.sentences.size());
    const int pos = static_cast<int>(rng.below(static_cast<uint32_t>(k)));
    const int doc = donors[rng.below(static_cast<uint32_t>(donors.size()))];
    const auto& donor_sents = corpus[static_cast<size_t>(doc)].sentences;
    const int si = static_cast<int>(rng.below(static_cast<uint32_t>(donor_sents.size())));
    std::vector<std::vector<int>> sents = seg.sentences;
    sents[pos] = donor_sents[static_cast<size_t>(si)];
    return finish_sample(std::move(sents), seg.input_tokens, SampleKind::substituted, source_id,
                         identity_order(k));
}

TrainingSample sample_negative(const SegmentedDocument& seg, const std::string& source_id,
                               const std::vector<SegmentedDocument>& corpus,
                               const std::vector<std::string>& corpus_ids, Rng& rng) {
    std::vector<SampleKind> pool = {SampleKind::shuffled, SampleKind::repeated,
                                    SampleKind::substituted};
    while (!pool.empty()) {
        const size_t pick = rng.below(static_cast<uint32_t>(pool.size()));
        const SampleKind kind = pool[pick];
        const bool feasible =
            (kind == SampleKind::repeated) ||
            (kind == SampleKind::shuffled && seg.sentences.size() >= 2) ||
            (kind == SampleKind::substituted &&
             std::any_of(corpus_ids.begin(), corpus_ids.end(),
                         [&](const std::string& id) { return id != source_id; }));
        if (feasible) {
            switch (kind) {
                case SampleKind::shuffled: return make_shuffled(seg, source_id, rng);
                case SampleKind::repeated: return make_repeated(seg, source_id, rng);
                case SampleKind::substituted:
                    return make_substituted(seg, source_id, corpus, corpus_ids, rng);
                default: break;
            }
        }
        pool.erase(pool.begin() + static_cast<long>(pick));
    }
    throw std::runtime_error("no feasible negative");
}

TrainingSample truncate_sample(const TrainingSample& s, int max_len) {
    SegmentedDocument seg;
    seg.input_tokens = s.input_tokens;
    seg.sentences = s.sentences;
    if (augmented_length(seg) <= max_len) return s;
    std::vector<int> order = s.original_order;
    while (seg.sentences.size() > 1 && augmented_length(seg) > max_len) {
        seg.sentences.pop_back();
        order.pop_back();
    }
    seg = truncate_to_fit(seg, max_len);
    // remap surviving original positions onto ranks 0..K'-1
    std::vector<int> sorted = order;
    std::sort(sorted.begin(), sorted.end());
    for (int& o : order)
        o = static_cast<int>(std::lower_bound(sorted.begin(), sorted.end(), o) - sorted.begin());
    return finish_sample(seg.sentences, seg.input_tokens, s.kind, s.source_id, std::move(order));
}

std::vector<std::vector<int>> order_labels(const TrainingSample& s) {
    const int k = static_cast<int>(s.original_order.size());
    std::vector<std::vector<int>> o(static_cast<size_t>(k), std::vector<int>(static_cast<size_t>(k), 0));
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j)
            if (i != j) o[i][j] = s.original_order[i] < s.original_order[j] ? 1 : 0;
    return o;
}

// ---------------------------------------------------------------------------
// probe sets
// ---------------------------------------------------------------------------

const char* aspect_name(Aspect a) {
    switch (a) {
        case Aspect::repetition: return "repetition";
        case Aspect::relatedness: return "relatedness";
        case Aspect::negation: return "negation";
        case Aspect::causal: return "causal";
        case Aspect::temporal: return "temporal";
    }
    return "?";
}

std::optional<Aspect> aspect_from_name(const std::string& s) {
    if (s == "repetition") return Aspect::repetition;
    if (s == "relatedness") return Aspect::relatedness;
    if (s == "negation") return Aspect::negation;
    if (s == "causal") return Aspect::causal;
    if (s == "temporal") return Aspect::temporal;
    return std::nullopt;
}

bool Lexicons::is_stopword(int id) const {
    return std::binary_search(stopwords.begin(), stopwords.end(), id);
}

namespace {

std::vector<int> encode_words(const std::vector<std::string>& words, const Vocab& vocab) {
    std::vector<int> out;
    for (const std::string& w : words) {
        const int id = vocab.encode(w);
        if (id != UNK) out.push_back(id);
    }
    return out;
}

std::vector<std::pair<int, int>> encode_pairs(
    const std::vector<std::pair<std::string, std::string>>& pairs, const Vocab& vocab) {
    std::vector<std::pair<int, int>> out;
    for (const auto& [a, b] : pairs) {
        const int ia = vocab.encode(a), ib = vocab.encode(b);
        if (ia != UNK && ib != UNK) out.emplace_back(ia, ib);
    }
    return out;
}

}  // namespace

Lexicons default_lexicons(const Vocab& vocab) {
    Lexicons lex;
    lex.negation = encode_words({"not", "never", "unable"}, vocab);
    lex.causal_connectives = encode_words({"so", "because"}, vocab);
    lex.causal_antonyms = encode_pairs({{"reason", "result"}}, vocab);
    lex.temporal_connectives = encode_words({"then", "before", "after"}, vocab);
    lex.temporal_antonyms = encode_pairs({{"before", "after"}}, vocab);
    lex.stopwords = encode_words({"a",   "an",  "and", "are", "at",  "he",    "her", "his", "i",
                                  "in",  "is",  "it",  "its", "my",  "of",    "on",  "or",  "our",
                                  "she", "that", "the", "their", "they", "this", "to", "was", "we",
                                  "were", "you"},
                                 vocab);
    std::sort(lex.stopwords.begin(), lex.stopwords.end());
    return lex;
}

namespace {

std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path);
    if (!in.is_open()) throw std::runtime_error("cannot open lexicon file: " + path);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
        if (!line.empty()) lines.push_back(line);
    }
    return lines;
}

std::vector<std::pair<std::string, std::string>> parse_pairs(const std::vector<std::string>& lines,
                                                             const std::string& path) {
    std::vector<std::pair<std::string, std::string>> out;
    for (const std::string& l : lines) {
        const size_t tab = l.find('\t');
        if (tab == std::string::npos)
            throw std::runtime_error(path + ": antonym line missing TAB: " + l);
        out.emplace_back(l.substr(0, tab), l.substr(tab + 1));
    }
    return out;
}

}  // namespace

Lexicons load_lexicons(const std::string& dir, const Vocab& vocab) {
    Lexicons lex;
    lex.negation = encode_words(read_lines(dir + "/negation.txt"), vocab);
    lex.causal_connectives = encode_words(read_lines(dir + "/causal_connectives.txt"), vocab);
    lex.causal_antonyms =
        encode_pairs(parse_pairs(read_lines(dir + "/causal_antonyms.txt"), dir), vocab);
    lex.temporal_connectives = encode_words(read_lines(dir + "/temporal_connectives.txt"), vocab);
    lex.temporal_antonyms =
        encode_pairs(parse_pairs(read_lines(dir + "/temporal_antonyms.txt"), dir), vocab);
    lex.stopwords = encode_words(read_lines(dir + "/stopwords.txt"), vocab);
    std::sort(lex.stopwords.begin(), lex.stopwords.end());
    return lex;
}

namespace {

bool contains_any(const std::vector<std::vector<int>>& sents, const std::vector<int>& words) {
    for (const auto& s : sents)
        for (int t : s)
            if (std::find(words.begin(), words.end(), t) != words.end()) return true;
    return false;
}

ProbeExample finish_probe(Aspect aspect, Polarity pol, std::vector<std::vector<int>> sents,
                          const std::string& source_id) {
    ProbeExample p;
    p.aspect = aspect;
    p.polarity = pol;
    SegmentedDocument seg;
    seg.sentences = sents;
    p.seq = insert_special_tokens(seg);
    p.sentences = std::move(sents);
    p.source_id = source_id;
    return p;
}

// one non-stopword token swapped for a nearby-frequency vocabulary token
// (vocabulary ids are frequency-ranked, so "nearby id" is "nearby frequency")
std::vector<int> jitter_one_token(const std::vector<int>& sent, const Lexicons& lex,
                                  const Vocab& vocab, Rng& rng) {
    std::vector<int> positions;
    for (size_t i = 0; i < sent.size(); ++i)
        if (sent[i] >= kNumReserved && !lex.is_stopword(sent[i])) positions.push_back(static_cast<int>(i));
    if (positions.empty())
        for (size_t i = 0; i < sent.size(); ++i) positions.push_back(static_cast<int>(i));
    const int pos = positions[rng.below(static_cast<uint32_t>(positions.size()))];
    const int orig = sent[static_cast<size_t>(pos)];
    const int v = vocab.size();
    const int band = std::max(8, (v - kNumReserved) / 10);
    int lo = std::max(kNumReserved, orig - band);
    int hi = std::min(v - 1, orig + band);
    if (hi <= lo) { lo = kNumReserved; hi = v - 1; }
    int repl = orig;
    for (int tries = 0; tries < 64 && repl == orig; ++tries)
        repl = lo + static_cast<int>(rng.below(static_cast<uint32_t>(hi - lo + 1)));
    if (repl == orig) repl = (orig == lo) ? hi : lo;
    std::vector<int> out = sent;
    out[static_cast<size_t>(pos)] = repl;
    return out;
}

double max_pairwise_similarity(const std::vector<std::vector<int>>& sents,
                               const SimilarityOracle& oracle) {
    double best = -1.0;
    std::vector<SentenceEmbedding> embs;
    embs.reserve(sents.size());
    for (const auto& s : sents) embs.push_back(oracle.embed(s));
    for (size_t i = 0; i < sents.size(); ++i)
        for (size_t j = i + 1; j < sents.size(); ++j) {
            const double t = (cosine(embs[i], embs[j]) + 1.0) / 2.0;
            best = std::max(best, t);
        }
    return best;
}

bool differs(const std::vector<std::vector<int>>& a, const std::vector<std::vector<int>>& b) {
    return a != b;
}

}  // namespace

bool reverse_around_connective(std::vector<std::vector<int>>& sents,
                               const std::vector<int>& connectives) {
    for (size_t s = 0; s < sents.size(); ++s) {
        const auto& sent = sents[s];
        for (size_t p = 0; p < sent.size(); ++p) {
            if (std::find(connectives.begin(), connectives.end(), sent[p]) == connectives.end())
                continue;
            if (p > 0 && p + 1 < sent.size()) {
                std::vector<int> a(sent.begin(), sent.begin() + static_cast<long>(p));
                std::vector<int> b(sent.begin() + static_cast<long>(p) + 1, sent.end());
                std::vector<int> merged = b;
                merged.push_back(sent[p]);
                merged.insert(merged.end(), a.begin(), a.end());
                sents[s] = std::move(merged);
                return true;
            }
            if (p == 0 && s >= 1 && sent.size() > 1) {
                std::vector<int> rest(sent.begin() + 1, sent.end());
                std::vector<int> prev = sents[s - 1];
                sents[s - 1] = rest;
                std::vector<int> repl = {sent[0]};
                repl.insert(repl.end(), prev.begin(), prev.end());
                sents[s] = std::move(repl);
                return true;
            }
        }
    }
    return false;
}

bool swap_antonym(std::vector<std::vector<int>>& sents,
                  const std::vector<std::pair<int, int>>& pairs) {
    for (auto& sent : sents)
        for (int& t : sent)
            for (const auto& [a, b] : pairs) {
                if (t == a) { t = b; return true; }
                if (t == b) { t = a; return true; }
            }
    return false;
}



ProbeBuildResult build_probe_set(const std::vector<SegmentedDocument>& corpus,
                                 const std::vector<std::string>& corpus_ids, Aspect aspect,
                                 const SimilarityOracle& oracle, const Lexicons& lex,
                                 const Vocab& vocab, const ProbeConfig& cfg, Rng& rng) {
    assert(corpus.size() == corpus_ids.size());
    ProbeBuildResult res;
    const uint64_t base = rng.next_u64();

    for (size_t d = 0; d < corpus.size(); ++d) {
        const auto& sents = corpus[d].sentences;
        const std::string& id = corpus_ids[d];
        Rng dr(hash_combine(base, hash_bytes(id)));

        switch (aspect) {
            case Aspect::repetition: {
                // incoherent only; coherent selection is not defined for it
                const int k = static_cast<int>(sents.size());
                const int i = static_cast<int>(dr.below(static_cast<uint32_t>(k)));
                std::vector<std::vector<int>> mod = sents;
                mod.insert(mod.begin() + i + 1, jitter_one_token(sents[static_cast<size_t>(i)], lex, vocab, dr));
                if (differs(mod, sents))
                    res.probes.push_back(finish_probe(aspect, Polarity::incoherent, std::move(mod), id));
                break;
            }
            case Aspect::relatedness: {
                if (sents.size() >= 2 && max_pairwise_similarity(sents, oracle) < cfg.relatedness_threshold)
                    res.probes.push_back(finish_probe(aspect, Polarity::coherent, sents, id));
                std::vector<std::vector<int>> mod = sents;
                if (dr.below(2) == 0) {
                    // replace ceil(20%) of non-stopword tokens with uniform draws
                    std::vector<std::pair<int, int>> slots;
                    for (size_t s = 0; s < sents.size(); ++s)
                        for (size_t t = 0; t < sents[s].size(); ++t)
                            if (sents[s][t] >= kNumReserved && !lex.is_stopword(sents[s][t]))
                                slots.emplace_back(static_cast<int>(s), static_cast<int>(t));
                    if (slots.empty()) break;
                    const size_t want = static_cast<size_t>(
                        std::ceil(0.2 * static_cast<double>(slots.size())));
                    for (size_t n = 0; n < want; ++n) {
                        const size_t pick = dr.below(static_cast<uint32_t>(slots.size()));
                        const auto [s, t] = slots[pick];
                        slots.erase(slots.begin() + static_cast<long>(pick));
                        int& tok = mod[static_cast<size_t>(s)][static_cast<size_t>(t)];
                        int repl = tok;
                        while (repl == tok)
                            repl = kNumReserved +
                                   static_cast<int>(dr.below(static_cast<uint32_t>(vocab.size() - kNumReserved)));
                        tok = repl;
                    }
                } else {
                    // replace one whole sentence with a foreign one
                    std::vector<int> donors;
                    for (size_t o = 0; o < corpus.size(); ++o)
                        if (corpus_ids[o] != id) donors.push_back(static_cast<int>(o));
                    if (donors.empty()) break;
                    const int pos = static_cast<int>(dr.below(static_cast<uint32_t>(sents.size())));
                    const auto& donor = corpus[static_cast<size_t>(
                        donors[dr.below(static_cast<uint32_t>(donors.size()))])];
                    mod[static_cast<size_t>(pos)] =
                        donor.sentences[dr.below(static_cast<uint32_t>(donor.sentences.size()))];
                }
                if (differs(mod, sents))
                    res.probes.push_back(finish_probe(aspect, Polarity::incoherent, std::move(mod), id));
                break;
            }
            case Aspect::negation: {
                if (contains_any(sents, lex.negation))
                    res.probes.push_back(finish_probe(aspect, Polarity::coherent, sents, id));
                if (lex.negation.empty()) break;
                std::vector<std::vector<int>> mod = sents;
                const int k = static_cast<int>(sents.size());
                const int want = static_cast<int>(std::ceil(0.2 * k));
                std::vector<int> order(static_cast<size_t>(k));
                for (int i = 0; i < k; ++i) order[static_cast<size_t>(i)] = i;
                for (int i = k - 1; i > 0; --i)
                    std::swap(order[static_cast<size_t>(i)],
                              order[dr.below(static_cast<uint32_t>(i + 1))]);
                order.resize(static_cast<size_t>(want));
                std::sort(order.begin(), order.end());
                const int not_id = vocab.encode("not") != UNK ? vocab.encode("not") : lex.negation[0];
                for (int s : order) {
                    auto& sent = mod[static_cast<size_t>(s)];
                    auto it = std::find_first_of(sent.begin(), sent.end(), lex.negation.begin(),
                                                 lex.negation.end());
                    if (it != sent.end())
                        sent.erase(it);  // delete the negated word
                    else if (sent.size() >= 1)
                        sent.insert(sent.begin() + 1, not_id);
                }
                if (differs(mod, sents))
                    res.probes.push_back(finish_probe(aspect, Polarity::incoherent, std::move(mod), id));
                break;
            }
            case Aspect::causal:
            case Aspect::temporal: {
                const auto& conns = aspect == Aspect::causal ? lex.causal_connectives
                                                             : lex.temporal_connectives;
                const auto& pairs = aspect == Aspect::causal ? lex.causal_antonyms
                                                             : lex.temporal_antonyms;
                if (contains_any(sents, conns))
                    res.probes.push_back(finish_probe(aspect, Polarity::coherent, sents, id));
                std::vector<std::vector<int>> mod = sents;
                bool ok = false;
                if (dr.below(2) == 0) {
                    ok = reverse_around_connective(mod, conns);
                    if (!ok) ok = swap_antonym(mod, pairs);
                } else {
                    ok = swap_antonym(mod, pairs);
                    if (!ok) ok = reverse_around_connective(mod, conns);
                }
                if (ok && differs(mod, sents))
                    res.probes.push_back(finish_probe(aspect, Polarity::incoherent, std::move(mod), id));
                break;
            }
        }
    }
    res.empty_warning = res.probes.empty();
    return res;
}

void save_probes_jsonl(const std::vector<ProbeExample>& probes, const Vocab& vocab,
                       const std::string& path) {
    std::ofstream out(path);
    if (!out.is_open()) throw std::runtime_error("cannot write probe file: " + path);
    for (const ProbeExample& p : probes) {
        nlohmann::json j;
        j["aspect"] = aspect_name(p.aspect);
        j["polarity"] = p.polarity == Polarity::coherent ? "coherent" : "incoherent";
        j["source_id"] = p.source_id;
        std::string tokens;
        for (const auto& sent : p.sentences)
            for (int t : sent) {
                if (!tokens.empty()) tokens.push_back(' ');
                tokens += vocab.decode(t);
            }
        j["tokens"] = tokens;
        out << j.dump() << "\n";
    }
}

std::vector<ProbeExample> load_probes_jsonl(const std::string& path, const Vocab& vocab) {
    std::ifstream in(path);
    if (!in.is_open()) throw std::runtime_error("cannot open probe file: " + path);
    std::vector<ProbeExample> out;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        nlohmann::json j = nlohmann::json::parse(line);
        auto aspect = aspect_from_name(j.at("aspect").get<std::string>());
        if (!aspect)
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": unknown aspect");
        Document d;
        d.id = j.value("source_id", "");
        d.target_text = j.at("tokens").get<std::string>();
        SegmentedDocument seg = encode_document(d, vocab);
        ProbeExample p;
        p.aspect = *aspect;
        p.polarity =
            j.at("polarity").get<std::string>() == "coherent" ? Polarity::coherent : Polarity::incoherent;
        p.sentences = seg.sentences;
        p.seq = insert_special_tokens(seg);
        p.source_id = d.id;
        out.push_back(std::move(p));
    }
    return out;
}

}  // namespace hint

#include "hint/evalsuite.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

namespace hint {

NllParts masked_nll(const std::vector<double>& position_nll, const std::vector<int>& targets) {
    if (position_nll.size() != targets.size()) throw std::runtime_error("masked_nll shape mismatch");
    NllParts out;
    for (size_t t = 0; t < targets.size(); ++t) {
        if (targets[t] == SEN || targets[t] == DIS) continue;
        out.nll_sum += position_nll[t];
        ++out.count;
    }
    return out;
}

double ppl_from_parts(const std::vector<NllParts>& parts) {
    double total = 0.0;
    long count = 0;
    for (const NllParts& p : parts) {
        total += p.nll_sum;
        count += p.count;
    }
    if (count == 0) throw std::runtime_error("no counted positions");
    return std::exp(total / static_cast<double>(count));
}

double perplexity(const Model& m, const std::vector<AugmentedSequence>& seqs,
                  const std::vector<std::vector<int>>& inputs) {
    if (seqs.empty()) throw std::runtime_error("empty eval corpus");
    if (seqs.size() != inputs.size()) throw std::runtime_error("perplexity shape mismatch");
    std::vector<NllParts> parts(seqs.size());
    const long n = static_cast<long>(seqs.size());
#pragma omp parallel for schedule(dynamic)
    for (long i = 0; i < n; ++i) {
        const auto nll = sequence_position_nll(m, seqs[static_cast<size_t>(i)],
                                               inputs[static_cast<size_t>(i)]);
        std::vector<int> targets(seqs[static_cast<size_t>(i)].ids.begin() + 1,
                                 seqs[static_cast<size_t>(i)].ids.end());
        parts[static_cast<size_t>(i)] = masked_nll(nll, targets);
    }
    return ppl_from_parts(parts);
}

// ---------------------------------------------------------------------------
// surface metrics
// ---------------------------------------------------------------------------

namespace {

using Counts = std::unordered_map<std::string, long>;

std::string ngram_key(const std::vector<std::string>& toks, size_t start, int k) {
    std::string key;
    for (int i = 0; i < k; ++i) {
        if (i) key.push_back('\x1f');
        key += toks[start + static_cast<size_t>(i)];
    }
    return key;
}

Counts ngram_counts(const std::vector<std::string>& toks, int k) {
    Counts c;
    if (static_cast<int>(toks.size()) >= k)
        for (size_t s = 0; s + static_cast<size_t>(k) <= toks.size(); ++s) ++c[ngram_key(toks, s, k)];
    return c;
}

}  // namespace

double bleu_n(const std::vector<std::vector<std::string>>& candidates,
              const std::vector<std::vector<std::string>>& references, int n) {
    if (candidates.empty()) throw std::runtime_error("empty candidate set");
    if (candidates.size() != references.size()) throw std::runtime_error("bleu shape mismatch");
    if (n < 1 || n > 4) throw std::runtime_error("unsupported bleu order");

    long cand_len = 0, ref_len = 0;
    std::vector<long> clipped(static_cast<size_t>(n), 0), total(static_cast<size_t>(n), 0);
    for (size_t i = 0; i < candidates.size(); ++i) {
        cand_len += static_cast<long>(candidates[i].size());
        ref_len += static_cast<long>(references[i].size());
        for (int k = 1; k <= n; ++k) {
            Counts cc = ngram_counts(candidates[i], k);
            Counts rc = ngram_counts(references[i], k);
            for (const auto& [gram, count] : cc) {
                auto it = rc.find(gram);
                const long allowed = it == rc.end() ? 0 : it->second;
                clipped[static_cast<size_t>(k - 1)] += std::min(count, allowed);
                total[static_cast<size_t>(k - 1)] += count;
            }
        }
    }
    if (cand_len == 0) return 0.0;
    double log_sum = 0.0;
    for (int k = 0; k < n; ++k) {
        double p = total[static_cast<size_t>(k)] > 0
                       ? static_cast<double>(clipped[static_cast<size_t>(k)]) /
                             static_cast<double>(total[static_cast<size_t>(k)])
                       : 0.0;
        if (p <= 0.0) p = 1e-9;  // smoothing floor
        log_sum += std::log(p);
    }
    const double bp = cand_len >= ref_len
                          ? 1.0
                          : std::exp(1.0 - static_cast<double>(ref_len) / static_cast<double>(cand_len));
    return bp * std::exp(log_sum / static_cast<double>(n));
}

double lexical_repetition(const std::vector<std::vector<std::string>>& texts, int n, bool strict_gt) {
    if (texts.empty()) throw std::runtime_error("empty text set");
    long hits = 0;
    for (const auto& toks : texts) {
        Counts c = ngram_counts(toks, 4);
        long best = 0;
        for (const auto& [gram, count] : c) best = std::max(best, count);
        if (strict_gt ? best > n : best >= n) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(texts.size());
}

SrResult semantic_repetition(const std::vector<std::vector<std::vector<int>>>& texts_sentences,
                             int n, const SimilarityOracle& oracle) {
    if (n < 1) throw std::runtime_error("sr needs n >= 1");
    SrResult r;
    double total = 0.0;
    for (const auto& sents : texts_sentences) {
        if (sents.size() < 2) {
            ++r.skipped;
            continue;
        }
        std::vector<SentenceEmbedding> embs;
        embs.reserve(sents.size());
        for (const auto& s : sents) embs.push_back(oracle.embed(s));
        std::vector<double> sims;
        for (size_t i = 0; i < sents.size(); ++i)
            for (size_t j = i + 1; j < sents.size(); ++j) {
                double t = (cosine(embs[i], embs[j]) + 1.0) / 2.0;
                if (t < 0.0) t = 0.0;
                if (t > 1.0) t = 1.0;
                sims.push_back(t);
            }
        std::sort(sims.begin(), sims.end(), std::greater<double>());
        const size_t take = std::min(sims.size(), static_cast<size_t>(n));
        double acc = 0.0;
        for (size_t i = 0; i < take; ++i) acc += sims[i];
        total += acc / static_cast<double>(take);
        ++r.counted;
    }
    if (r.counted == 0) throw std::runtime_error("no text with >= 2 sentences");
    r.value = total / static_cast<double>(r.counted);
    return r;
}

double distinct4(const std::vector<std::vector<std::string>>& texts) {
    std::unordered_set<std::string> uniq;
    long total = 0;
    for (const auto& toks : texts) {
        if (toks.size() < 4) continue;
        for (size_t s = 0; s + 4 <= toks.size(); ++s) {
            uniq.insert(ngram_key(toks, s, 4));
            ++total;
        }
    }
    if (total == 0) throw std::runtime_error("no 4-grams");
    return static_cast<double>(uniq.size()) / static_cast<double>(total);
}

double distinct4_text_averaged(const std::vector<std::vector<std::string>>& texts) {
    double acc = 0.0;
    long counted = 0;
    for (const auto& toks : texts) {
        Counts c = ngram_counts(toks, 4);
        long total = 0;
        for (const auto& [gram, count] : c) total += count;
        if (total == 0) continue;
        acc += static_cast<double>(c.size()) / static_cast<double>(total);
        ++counted;
    }
    if (counted == 0) throw std::runtime_error("no 4-grams");
    return acc / static_cast<double>(counted);
}

// ---------------------------------------------------------------------------
// probe scoring
// ---------------------------------------------------------------------------

AspectPplTable aspect_ppl(const Model& m, const std::vector<ProbeExample>& probes) {
    if (probes.empty()) throw std::runtime_error("empty probe set");
    // bucket by (aspect, polarity), keeping the incoming order within buckets
    std::map<std::string, std::map<std::string, std::vector<const ProbeExample*>>> buckets;
    for (const ProbeExample& p : probes)
        buckets[aspect_name(p.aspect)][p.polarity == Polarity::coherent ? "coherent" : "incoherent"]
            .push_back(&p);

    AspectPplTable out;
    for (const auto& [aspect, pols] : buckets) {
        for (const auto& [pol, group] : pols) {
            std::vector<NllParts> parts(group.size());
            const long n = static_cast<long>(group.size());
#pragma omp parallel for schedule(dynamic)
            for (long i = 0; i < n; ++i) {
                const ProbeExample& p = *group[static_cast<size_t>(i)];
                const auto nll = sequence_position_nll(m, p.seq, {});
                std::vector<int> targets(p.seq.ids.begin() + 1, p.seq.ids.end());
                parts[static_cast<size_t>(i)] = masked_nll(nll, targets);
            }
            out.ppl[aspect][pol] = ppl_from_parts(parts);
            out.counts[aspect][pol] = n;
        }
    }
    return out;
}

namespace {

std::vector<double> rep_at(const Model& m, const std::vector<std::vector<int>>& sentences, int k,
                           const std::vector<int>& input_tokens, bool discourse) {
    if (k < 0 || k >= static_cast<int>(sentences.size()))
        throw std::runtime_error("sentence index out of range");
    SegmentedDocument seg;
    seg.input_tokens = input_tokens;
    seg.sentences = sentences;
    AugmentedSequence aug = insert_special_tokens(seg);
    ad::Graph g(false);
    BoundModel bm(g, m, false);
    auto f = bm.forward(aug, input_tokens, true, false);
    const Tensor& reps = g.val(discourse ? f.hd : f.hs);
    std::vector<double> out(static_cast<size_t>(reps.cols));
    for (int j = 0; j < reps.cols; ++j) out[static_cast<size_t>(j)] = reps.at(k, j);
    return out;
}

}  // namespace

std::vector<double> sentence_rep(const Model& m, const std::vector<std::vector<int>>& sentences,
                                 int k, const std::vector<int>& input_tokens) {
    return rep_at(m, sentences, k, input_tokens, false);
}

std::vector<double> discourse_rep(const Model& m, const std::vector<std::vector<int>>& sentences,
                                  int k, const std::vector<int>& input_tokens) {
    return rep_at(m, sentences, k, input_tokens, true);
}

RepProbeResult probe_sentence_similarity(const Model& m, const SentenceInContext& a,
                                         const SentenceInContext& b, const ZStats& reference) {
    const auto ra = sentence_rep(m, a.sentences, a.index, a.input_tokens);
    const auto rb = sentence_rep(m, b.sentences, b.index, b.input_tokens);
    RepProbeResult r;
    r.raw_cosine = cosine(ra, rb);
    r.z = reference.z(r.raw_cosine);
    return r;
}

std::vector<double> segment_rep(const Model& m, const std::vector<std::vector<int>>& sentences,
                                const std::vector<int>& input_tokens, int k) {
    if (k < 0 || k + 1 >= static_cast<int>(sentences.size()))
        throw std::runtime_error("segment index out of range");
    auto a = discourse_rep(m, sentences, k, input_tokens);
    auto b = discourse_rep(m, sentences, k + 1, input_tokens);
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

RepProbeResult probe_segment_reversal(const Model& m,
                                      const std::vector<std::vector<int>>& sentences,
                                      const std::vector<int>& input_tokens, int k,
                                      const ZStats& reference) {
    if (k < 0 || k + 1 >= static_cast<int>(sentences.size()))
        throw std::runtime_error("segment index out of range");
    const std::vector<double> normal = segment_rep(m, sentences, input_tokens, k);

    std::vector<std::vector<int>> swapped = sentences;
    std::swap(swapped[static_cast<size_t>(k)], swapped[static_cast<size_t>(k) + 1]);
    // original sentence k now sits at presented position k+1 and vice versa;
    // concatenate in original order
    auto orig_k = discourse_rep(m, swapped, k + 1, input_tokens);
    auto orig_k1 = discourse_rep(m, swapped, k, input_tokens);
    std::vector<double> reversed = orig_k;
    reversed.insert(reversed.end(), orig_k1.begin(), orig_k1.end());

    RepProbeResult r;
    r.raw_cosine = cosine(normal, reversed);
    r.z = reference.z(r.raw_cosine);
    return r;
}

}  // namespace hint

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "hint/evalsuite.hpp"
#include "hint/rng.hpp"
#include "oracles.hpp"

using namespace hint;

namespace {

AugmentedSequence aug_of(std::vector<std::vector<int>> sents) {
    SegmentedDocument seg;
    seg.sentences = std::move(sents);
    return insert_special_tokens(seg);
}

Model small_model(int vocab, uint64_t seed) {
    ModelConfig c;
    c.d_model = 16;
    c.n_layers_enc = 1;
    c.n_layers_dec = 1;
    c.n_heads = 4;
    c.d_ff = 24;
    c.vocab_size = vocab;
    c.max_len = 48;
    Model m(c);
    m.init_params(seed);
    return m;
}

std::vector<std::string> words(std::initializer_list<const char*> w) {
    return {w.begin(), w.end()};
}

}  // namespace

TEST_CASE("masked_nll skips marker targets; BOS never a target; EOS counted") {
    AugmentedSequence aug = aug_of({{6, 7}});  // BOS 6 7 SEN DIS EOS
    std::vector<int> targets(aug.ids.begin() + 1, aug.ids.end());
    std::vector<double> nll = {1.0, 1.0, 50.0, 50.0, 3.0};  // junk at SEN/DIS positions
    NllParts p = masked_nll(nll, targets);
    CHECK(p.count == 3);
    CHECK(p.nll_sum == doctest::Approx(5.0).epsilon(1e-12));

    // perturbing marker-position values changes nothing
    std::vector<double> perturbed = {1.0, 1.0, -2.0, 9000.0, 3.0};
    NllParts q = masked_nll(perturbed, targets);
    CHECK(q.nll_sum == p.nll_sum);
    CHECK(q.count == p.count);

    // two counted positions with P = e^-1 and e^-3: PPL = e^2
    std::vector<double> two = {1.0, 3.0};
    std::vector<int> two_targets = {7, EOS};
    CHECK(ppl_from_parts({masked_nll(two, two_targets)}) ==
          doctest::Approx(std::exp(2.0)).epsilon(1e-9));
}

TEST_CASE("adding a sentence split leaves PPL unchanged when counted probs are fixed") {
    // one text as a single sentence, the same text split in two: the extra
    // SEN/DIS targets are masked out, so equal per-position values give equal
    // perplexity
    std::vector<int> flat_targets = {6, 7, 8, 9, EOS};
    std::vector<double> flat_nll = {1.1, 0.9, 1.3, 0.7, 1.0};
    AugmentedSequence split = aug_of({{6, 7}, {8, 9}});
    std::vector<int> split_targets(split.ids.begin() + 1, split.ids.end());
    std::vector<double> split_nll;
    size_t src = 0;
    for (int t : split_targets) {
        if (t == SEN || t == DIS)
            split_nll.push_back(123.0);  // arbitrary, masked
        else
            split_nll.push_back(flat_nll[src++]);
    }
    CHECK(ppl_from_parts({masked_nll(flat_nll, flat_targets)}) ==
          doctest::Approx(ppl_from_parts({masked_nll(split_nll, split_targets)})).epsilon(1e-12));
}

TEST_CASE("uniform model gives PPL = V exactly") {
    Model m = small_model(22, 3);
    m.params().tensors[static_cast<size_t>(m.lm_w)].fill(0.0);
    m.params().tensors[static_cast<size_t>(m.lm_b)].fill(0.0);
    std::vector<AugmentedSequence> seqs = {aug_of({{6, 7, 8}}), aug_of({{9}, {10, 11}})};
    std::vector<std::vector<int>> inputs = {{}, {6}};
    CHECK(perplexity(m, seqs, inputs) == doctest::Approx(22.0).epsilon(1e-12));
}

TEST_CASE("bleu: identity, disjoint, hand case") {
    std::vector<std::vector<std::string>> cand = {words({"a", "b", "c"})};
    std::vector<std::vector<std::string>> ref = {words({"a", "b", "c"})};
    CHECK(bleu_n(cand, ref, 1) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(bleu_n(cand, ref, 2) == doctest::Approx(1.0).epsilon(1e-12));

    std::vector<std::vector<std::string>> other = {words({"x", "y", "z"})};
    CHECK(bleu_n(cand, other, 1) == doctest::Approx(0.0).epsilon(1e-8));

    std::vector<std::vector<std::string>> ref2 = {words({"a", "b", "d"})};
    CHECK(bleu_n(cand, ref2, 1) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));

    CHECK_THROWS(bleu_n({}, {}, 1));
}

TEST_CASE("bleu clips repeated candidate grams against the reference") {
    std::vector<std::vector<std::string>> cand = {words({"a", "a", "a", "a"})};
    std::vector<std::vector<std::string>> ref = {words({"a", "b", "c", "d"})};
    CHECK(bleu_n(cand, ref, 1) == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("lexical repetition: qualifying text, distinct grams, ratio, short texts") {
    auto rep = words({"a", "b", "c", "d", "a", "b", "c", "d"});
    auto uniq = words({"a", "b", "c", "d", "e", "f", "g", "h"});
    CHECK(lexical_repetition({rep}, 2) == 1.0);
    CHECK(lexical_repetition({uniq}, 2) == 0.0);
    std::vector<std::vector<std::string>> ten(10, uniq);
    for (int i = 0; i < 3; ++i) ten[static_cast<size_t>(i)] = rep;
    CHECK(lexical_repetition(ten, 2) == doctest::Approx(0.3).epsilon(1e-12));
    // a 3-token text cannot repeat a 4-gram but still counts in the denominator
    CHECK(lexical_repetition({words({"a", "b", "c"}), rep}, 1) == doctest::Approx(0.5));
    // strict variant needs one more occurrence
    CHECK(lexical_repetition({rep}, 2, true) == 0.0);
    CHECK(lexical_repetition({rep}, 1, true) == 1.0);
}

TEST_CASE("semantic repetition: duplicated sentence scores 1.0; top-n; skip counting") {
    HashedOracle oracle(5);
    std::vector<std::vector<std::vector<int>>> texts = {
        {{6, 7, 8}, {6, 7, 8}, {20, 21, 22}},  // contains a duplicate pair
        {{9, 10}},                             // skipped, single sentence
    };
    auto r1 = semantic_repetition(texts, 1, oracle);
    CHECK(r1.counted == 1);
    CHECK(r1.skipped == 1);
    CHECK(r1.value == doctest::Approx(1.0).epsilon(1e-9));

    // n beyond the pair count equals the plain mean of pairwise similarities
    std::vector<std::vector<std::vector<int>>> tri = {{{6, 7}, {8, 9}, {10, 11}}};
    auto rn = semantic_repetition(tri, 10, oracle);
    double mean = (golden_similarity({6, 7}, {8, 9}, oracle) +
                   golden_similarity({6, 7}, {10, 11}, oracle) +
                   golden_similarity({8, 9}, {10, 11}, oracle)) /
                  3.0;
    CHECK(rn.value == doctest::Approx(mean).epsilon(1e-12));

    CHECK_THROWS(semantic_repetition({{{6, 7}}}, 1, oracle));
}

TEST_CASE("distinct-4: single text 1.0, duplicate halves, five tokens") {
    auto t = words({"a", "b", "c", "d"});
    CHECK(distinct4({t}) == 1.0);
    CHECK(distinct4({t, t}) == 0.5);
    CHECK(distinct4({words({"a", "b", "c", "d", "e"})}) == 1.0);
    CHECK_THROWS(distinct4({words({"a", "b"})}));
}

TEST_CASE("metrics agree exactly with brute-force references on random corpora") {
    Rng rng(2025);
    HashedOracle oracle(31);
    for (int corpus = 0; corpus < 12; ++corpus) {
        const int ntexts = 2 + static_cast<int>(rng.below(6));
        std::vector<std::vector<std::string>> cands, refs;
        std::vector<std::vector<std::vector<int>>> sent_texts;
        for (int t = 0; t < ntexts; ++t) {
            auto mk = [&](int maxlen) {
                std::vector<std::string> toks;
                const int len = 1 + static_cast<int>(rng.below(static_cast<uint32_t>(maxlen)));
                for (int i = 0; i < len; ++i)
                    toks.push_back(std::string(1, static_cast<char>('a' + rng.below(5))));
                return toks;
            };
            cands.push_back(mk(20));
            refs.push_back(mk(20));
            std::vector<std::vector<int>> sents;
            const int ns = 1 + static_cast<int>(rng.below(4));
            for (int s = 0; s < ns; ++s) {
                std::vector<int> ids;
                const int len = 1 + static_cast<int>(rng.below(6));
                for (int i = 0; i < len; ++i) ids.push_back(6 + static_cast<int>(rng.below(9)));
                sents.push_back(ids);
            }
            sent_texts.push_back(sents);
        }
        for (int n : {1, 2}) CHECK(bleu_n(cands, refs, n) == oracles::bf_bleu(cands, refs, n));
        for (int n : {1, 2, 3})
            CHECK(lexical_repetition(cands, n) == oracles::bf_lexical_repetition(cands, n));
        bool any4 = false;
        for (const auto& c : cands) any4 |= c.size() >= 4;
        if (any4) CHECK(distinct4(cands) == oracles::bf_distinct4(cands));
        long eligible = 0;
        for (const auto& s : sent_texts) eligible += s.size() >= 2;
        if (eligible > 0) {
            for (int n : {1, 3}) {
                long bf_skipped = 0;
                const double bf = oracles::bf_semantic_repetition(sent_texts, n, oracle, &bf_skipped);
                auto mine = semantic_repetition(sent_texts, n, oracle);
                CHECK(mine.value == bf);
                CHECK(mine.skipped == bf_skipped);
            }
        }
    }
}

TEST_CASE("aspect_ppl: identical probe under both polarities scores identically") {
    Model m = small_model(30, 11);
    ProbeExample a, b;
    a.aspect = Aspect::temporal;
    a.polarity = Polarity::coherent;
    a.sentences = {{6, 7, 8}, {9, 10}};
    a.seq = aug_of(a.sentences);
    a.source_id = "x";
    b = a;
    b.polarity = Polarity::incoherent;
    auto table = aspect_ppl(m, {a, b});
    CHECK(table.ppl.at("temporal").at("coherent") ==
          doctest::Approx(table.ppl.at("temporal").at("incoherent")).epsilon(1e-12));
    CHECK(table.counts.at("temporal").at("coherent") == 1);
}

TEST_CASE("rep probes: self cosine 1, z-normalization self-check") {
    Model m = small_model(30, 13);
    std::vector<std::vector<int>> sents = {{6, 7}, {8, 9, 10}, {11}};
    auto r = sentence_rep(m, sents, 1, {});
    CHECK(cosine(r, r) == doctest::Approx(1.0).epsilon(1e-12));

    // reference sample z-scores have mean 0, std 1
    Rng rng(17);
    std::vector<double> ref;
    for (int i = 0; i < 500; ++i) ref.push_back(rng.gaussian() * 0.3 + 0.1);
    ZStats zs = fit_zstats(ref);
    double mean = 0.0, var = 0.0;
    for (double x : ref) mean += zs.z(x);
    mean /= static_cast<double>(ref.size());
    for (double x : ref) var += (zs.z(x) - mean) * (zs.z(x) - mean);
    var /= static_cast<double>(ref.size());
    CHECK(std::fabs(mean) < 1e-6);
    CHECK(std::fabs(std::sqrt(var) - 1.0) < 1e-6);
}

TEST_CASE("segment reversal: swapping twice is the identity; probe runs") {
    Model m = small_model(30, 15);
    std::vector<std::vector<int>> sents = {{6, 7}, {8, 9}, {10, 11}};
    auto seg0 = segment_rep(m, sents, {}, 0);
    std::vector<std::vector<int>> twice = sents;
    std::swap(twice[0], twice[1]);
    std::swap(twice[0], twice[1]);
    auto seg1 = segment_rep(m, twice, {}, 0);
    CHECK(cosine(seg0, seg1) == doctest::Approx(1.0).epsilon(1e-12));

    ZStats zs;
    zs.mean = 0.5;
    zs.stddev = 0.2;
    auto res = probe_segment_reversal(m, sents, {}, 1, zs);
    CHECK(std::isfinite(res.raw_cosine));
    CHECK(res.z == doctest::Approx((res.raw_cosine - 0.5) / 0.2).epsilon(1e-12));
    CHECK_THROWS(probe_segment_reversal(m, sents, {}, 2, zs));
}

TEST_CASE("probe_sentence_similarity: same sentence in same context scores raw cosine 1") {
    Model m = small_model(30, 21);
    std::vector<std::vector<int>> sents = {{6, 7}, {8, 9, 10}};
    ZStats zs;
    zs.mean = 0.2;
    zs.stddev = 0.5;
    SentenceInContext a{sents, 1, {11, 12}};
    auto r = probe_sentence_similarity(m, a, a, zs);
    CHECK(r.raw_cosine == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(r.z == doctest::Approx((1.0 - 0.2) / 0.5).epsilon(1e-12));
    // different context shifts the representation
    SentenceInContext b{{{6, 7}, {8, 9, 10}, {13}}, 1, {11, 12}};
    auto r2 = probe_sentence_similarity(m, a, b, zs);
    CHECK(r2.raw_cosine == doctest::Approx(1.0).epsilon(1e-12));  // causality: same prefix
    SentenceInContext c{{{13}, {8, 9, 10}}, 1, {11, 12}};
    auto r3 = probe_sentence_similarity(m, a, c, zs);
    CHECK(r3.raw_cosine != doctest::Approx(1.0).epsilon(1e-9));
}

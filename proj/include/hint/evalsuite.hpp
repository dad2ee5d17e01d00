#pragma once

#include <map>
#include <string>
#include <vector>

#include "hint/augment.hpp"
#include "hint/model.hpp"
#include "hint/stats.hpp"
#include "hint/teacher.hpp"

namespace hint {

// --- masked perplexity ---------------------------------------------------

struct NllParts {
    double nll_sum = 0.0;
    long count = 0;
};

// Sum and count of -log P over target positions whose golden token is not a
// sentence/discourse marker (BOS is never a target; EOS counts).
NllParts masked_nll(const std::vector<double>& position_nll, const std::vector<int>& targets);

double ppl_from_parts(const std::vector<NllParts>& parts);

// exp of the corpus mean masked NLL; parallel across documents with a fixed
// reduction order.
double perplexity(const Model& m, const std::vector<AugmentedSequence>& seqs,
                  const std::vector<std::vector<int>>& inputs);

// --- surface metrics ------------------------------------------------------

// Corpus-level BLEU-n (n in {1,2}): clipped modified precision per order,
// geometric mean, brevity penalty; zero precisions floored at 1e-9.
double bleu_n(const std::vector<std::vector<std::string>>& candidates,
              const std::vector<std::vector<std::string>>& references, int n);

// Fraction of texts containing some 4-gram occurring at least n times
// (strictly more than n times with strict_gt, kept for sensitivity checks).
double lexical_repetition(const std::vector<std::vector<std::string>>& texts, int n,
                          bool strict_gt = false);

struct SrResult {
    double value = 0.0;
    long counted = 0;
    long skipped = 0;  // texts with fewer than two sentences
};

// Per text: mean of the top-n pairwise oracle similarities between its
// sentences (all pairs when fewer than n); then mean over texts.
SrResult semantic_repetition(const std::vector<std::vector<std::vector<int>>>& texts_sentences,
                             int n, const SimilarityOracle& oracle);

// Unique 4-grams over total 4-grams, across the whole corpus.
double distinct4(const std::vector<std::vector<std::string>>& texts);
// Per-text-averaged variant (texts without a 4-gram are skipped).
double distinct4_text_averaged(const std::vector<std::vector<std::string>>& texts);

// --- probe scoring ---------------------------------------------------------

struct AspectPplTable {
    // aspect -> polarity -> perplexity; missing groups are simply absent
    std::map<std::string, std::map<std::string, double>> ppl;
    std::map<std::string, std::map<std::string, long>> counts;
};

AspectPplTable aspect_ppl(const Model& m, const std::vector<ProbeExample>& probes);

// --- representation probes --------------------------------------------------

struct RepProbeResult {
    double raw_cosine = 0.0;
    double z = 0.0;
};

// H^s / H^d of sentence k when decoding the given sentences after the input.
std::vector<double> sentence_rep(const Model& m, const std::vector<std::vector<int>>& sentences,
                                 int k, const std::vector<int>& input_tokens);
std::vector<double> discourse_rep(const Model& m, const std::vector<std::vector<int>>& sentences,
                                  int k, const std::vector<int>& input_tokens);

struct SentenceInContext {
    std::vector<std::vector<int>> sentences;
    int index = 0;
    std::vector<int> input_tokens;
};

RepProbeResult probe_sentence_similarity(const Model& m, const SentenceInContext& a,
                                         const SentenceInContext& b, const ZStats& reference);

// Segment vector = concat of the discourse reps of sentences k and k+1.
std::vector<double> segment_rep(const Model& m, const std::vector<std::vector<int>>& sentences,
                                const std::vector<int>& input_tokens, int k);

// Cosine between the normal-order segment vector and the vector rebuilt, in
// original sentence order, from the pass with sentences k and k+1 swapped.
RepProbeResult probe_segment_reversal(const Model& m,
                                      const std::vector<std::vector<int>>& sentences,
                                      const std::vector<int>& input_tokens, int k,
                                      const ZStats& reference);

}  // namespace hint
